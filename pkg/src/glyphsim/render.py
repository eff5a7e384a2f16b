"""TrueType font loading, renderability checks, and glyph rasterization.

A codepoint qualifies as renderable by a font when the font's character
map covers it, the mapped glyph is not .notdef (glyph 0), the outline is
not bit-identical to the .notdef outline, and the outline carries ink.
The collection-level answer is the first qualifying font in sorted-id
order, which keeps evaluation renders deterministic.

Bitmaps are 64x64 grayscale, background 0.0, ink up to 1.0, glyph scaled
to fit the canvas preserving aspect ratio and centered.
"""

from __future__ import annotations

import math
import unicodedata
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from fontTools.pens.recordingPen import RecordingPen
from fontTools.ttLib import TTFont
from PIL import Image, ImageFont
from scipy import ndimage

from .codepoints import check_scalar, to_hex
from .errors import DataError, DegenerateError

CANVAS_SIZE = 64
# Glyphs scale to fit this box, centered on the canvas. The margin keeps
# solid-fill glyphs (e.g. U+2588 FULL BLOCK) from rasterizing to a
# constant all-ink bitmap, which would be indistinguishable from failure.
_GLYPH_BOX = 60
# Em size used for the initial FreeType rasterization before downscaling.
# Large enough that anti-aliasing detail survives the resize to 64px.
_RASTER_EM = 192

_TRUETYPE_MAGICS = {"\x00\x01\x00\x00", "true"}

# Default-ignorable codepoints (soft hyphen, joiners, bidi controls,
# variation selectors, fillers, ...). Fonts often carry visible debug
# outlines for these, but text shaping suppresses them, so outline
# inspection alone would overpromise renderability.
_DEFAULT_IGNORABLE_RANGES = (
    (0x00AD, 0x00AD), (0x034F, 0x034F), (0x061C, 0x061C), (0x115F, 0x1160),
    (0x17B4, 0x17B5), (0x180B, 0x180F), (0x200B, 0x200F), (0x202A, 0x202E),
    (0x2060, 0x206F), (0x3164, 0x3164), (0xFE00, 0xFE0F), (0xFEFF, 0xFEFF),
    (0xFFA0, 0xFFA0), (0xFFF0, 0xFFF8), (0x1BCA0, 0x1BCA3),
    (0x1D173, 0x1D17A), (0xE0000, 0xE0FFF),
)


def _needs_raster_check(codepoint: int) -> bool:
    """Codepoints whose outline may disagree with the shaped raster."""
    if unicodedata.category(chr(codepoint)) in ("Cf", "Cc", "Zs", "Zl", "Zp"):
        return True
    return any(lo <= codepoint <= hi for lo, hi in _DEFAULT_IGNORABLE_RANGES)


@dataclass
class GlyphBitmap:
    """Fixed-size grayscale raster of one codepoint from one font."""

    pixels: np.ndarray  # (64, 64) float32 in [0, 1]
    codepoint: int
    font_id: str

    def __post_init__(self):
        check_scalar(self.codepoint)
        if self.pixels.shape != (CANVAS_SIZE, CANVAS_SIZE):
            raise DataError(
                f"bitmap must be {CANVAS_SIZE}x{CANVAS_SIZE}, got {self.pixels.shape}"
            )
        if self.pixels.dtype != np.float32:
            self.pixels = self.pixels.astype(np.float32)
        lo, hi = float(self.pixels.min()), float(self.pixels.max())
        if lo < 0.0 or hi > 1.0:
            raise DataError(f"bitmap intensities outside [0,1]: min={lo} max={hi}")
        if lo == hi:
            raise DegenerateError(
                f"constant bitmap for U+{to_hex(self.codepoint)} ({self.font_id}): "
                "blank rasters indicate a rendering failure"
            )

    def to_bytes(self) -> bytes:
        """Row-major 8-bit grayscale serialization (shared with NCD)."""
        return np.round(self.pixels * 255.0).astype(np.uint8).tobytes()

    def save_png(self, directory: Path) -> Path:
        """Write <hex>_<font_id>.png, 8-bit grayscale."""
        path = Path(directory) / f"{to_hex(self.codepoint)}_{self.font_id}.png"
        img = Image.fromarray(np.round(self.pixels * 255.0).astype(np.uint8), mode="L")
        img.save(path)
        return path


@dataclass(frozen=True)
class AugmentationParams:
    """Symmetric affine jitter ranges, all containing the identity."""

    max_translation: float = 0.0  # px, +/-
    rotation_range: float = 0.0  # degrees, +/-
    scale_range: tuple[float, float] = (1.0, 1.0)
    shear_range: float = 0.0  # degrees, +/-
    seed: int = 0

    def __post_init__(self):
        if self.max_translation < 0 or self.rotation_range < 0 or self.shear_range < 0:
            raise DataError("augmentation ranges must be non-negative")
        lo, hi = self.scale_range
        if not (0 < lo <= 1.0 <= hi):
            raise DataError(f"scale_range must bracket 1.0, got {self.scale_range}")

    @property
    def is_identity(self) -> bool:
        return (
            self.max_translation == 0
            and self.rotation_range == 0
            and self.shear_range == 0
            and self.scale_range == (1.0, 1.0)
        )


class FontFace:
    """One parsed TrueType font: character map plus renderability data."""

    def __init__(self, font_id: str, path: Path, ttfont: TTFont):
        self.font_id = font_id
        self.path = path
        self.ttfont = ttfont
        self.cmap = ttfont.getBestCmap()
        self._glyf = ttfont["glyf"]
        self._notdef_sig = None
        self._notdef_rec = None
        if ".notdef" in self._glyf.glyphs:
            self._notdef_sig = self._cheap_signature(".notdef")
            self._notdef_rec = self._record_outline(".notdef")
        self._supported: frozenset[int] | None = None
        self._pil_font: ImageFont.FreeTypeFont | None = None

    def _cheap_signature(self, name):
        glyph = self._glyf[name]
        return (
            glyph.numberOfContours,
            getattr(glyph, "xMin", None),
            getattr(glyph, "yMin", None),
            getattr(glyph, "xMax", None),
            getattr(glyph, "yMax", None),
        )

    def _record_outline(self, name):
        rec = RecordingPen()
        try:
            self._glyf[name].draw(rec, self._glyf)
        except Exception:
            return None
        return rec.value

    def _has_ink(self, name: str, _depth: int = 0) -> bool:
        # Composite glyphs carry ink iff some component does; depth guard
        # against malformed circular references.
        if _depth > 8 or name not in self._glyf.glyphs:
            return False
        glyph = self._glyf[name]
        if glyph.numberOfContours > 0:
            return True
        if glyph.isComposite():
            return any(self._has_ink(c.glyphName, _depth + 1) for c in glyph.components)
        return False

    def supports(self, codepoint: int) -> bool:
        """Renderability by this font alone: mapped, not .notdef, has ink."""
        if self._supported is not None:
            return codepoint in self._supported
        name = self.cmap.get(codepoint)
        if name is None:
            return False
        return self._glyph_qualifies(name) and self._raster_ok(codepoint)

    def _raster_ok(self, codepoint: int) -> bool:
        """Raster-level ink check for shaping-suppressed codepoints."""
        if not _needs_raster_check(codepoint):
            return True
        mask = self.pil_font().getmask(chr(codepoint), mode="L")
        w, h = mask.size
        return w > 0 and h > 0 and any(bytes(mask))

    def _glyph_qualifies(self, name: str) -> bool:
        if self.ttfont.getGlyphID(name) == 0:
            return False
        if not self._has_ink(name):
            return False
        # Outline identical to .notdef counts as the replacement glyph.
        # Cheap contour/bbox gate first; full outline compare only on match.
        if self._notdef_rec and self._cheap_signature(name) == self._notdef_sig:
            if self._record_outline(name) == self._notdef_rec:
                return False
        return True

    def supported_codepoints(self) -> frozenset[int]:
        """Queryable supported set; computed once, then cached."""
        if self._supported is None:
            self._supported = frozenset(
                c
                for c, name in self.cmap.items()
                if self._glyph_qualifies(name) and self._raster_ok(c)
            )
        return self._supported

    def pil_font(self) -> ImageFont.FreeTypeFont:
        if self._pil_font is None:
            self._pil_font = ImageFont.truetype(str(self.path), _RASTER_EM)
        return self._pil_font


class FontCollection:
    """Ordered, read-only set of parsed fonts (sorted by font_id)."""

    def __init__(self, faces: list[FontFace]):
        if not faces:
            raise DataError("empty font collection")
        ids = [f.font_id for f in faces]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise DataError(f"duplicate font identifiers: {dupes}")
        self.faces = sorted(faces, key=lambda f: f.font_id)
        self._by_id = {f.font_id: f for f in self.faces}

    def __len__(self):
        return len(self.faces)

    def __getitem__(self, font_id: str) -> FontFace:
        try:
            return self._by_id[font_id]
        except KeyError:
            raise DataError(f"unknown font id: {font_id}") from None

    @property
    def font_ids(self) -> list[str]:
        return [f.font_id for f in self.faces]

    def font_for(self, codepoint: int) -> str | None:
        """First font (in id order) that renders the codepoint, else None."""
        for face in self.faces:
            if face.supports(codepoint):
                return face.font_id
        return None

    def fonts_for(self, codepoint: int) -> list[str]:
        """All qualifying font ids, in collection order."""
        return [f.font_id for f in self.faces if f.supports(codepoint)]

    def supported_codepoints(self) -> frozenset[int]:
        """Union of per-font supported sets."""
        out: set[int] = set()
        for face in self.faces:
            out |= face.supported_codepoints()
        return frozenset(out)

    def manifest(self) -> list[dict]:
        """Stable description of the loaded fonts, for report fingerprints."""
        return [
            {"font_id": f.font_id, "path": str(f.path), "glyphs": len(f.cmap)}
            for f in self.faces
        ]


def load_fonts(paths: list[str | Path]) -> FontCollection:
    """Parse TrueType files into a FontCollection.

    Raises DataError naming the offending path for unreadable or
    non-TrueType input. Font ids are file stems; they must be unique.
    """
    if not paths:
        raise DataError("no font paths given: empty collection")
    faces = []
    for raw in paths:
        path = Path(raw)
        if not path.is_file():
            raise DataError(f"font file not found: {path}")
        try:
            ttfont = TTFont(str(path), lazy=True)
            _ = ttfont.getBestCmap()  # force cmap parse so corruption surfaces here
        except Exception as exc:  # fontTools raises a mix of exception types
            raise DataError(f"cannot parse font file {path}: {exc}") from exc
        if ttfont.sfntVersion not in _TRUETYPE_MAGICS or "glyf" not in ttfont:
            raise DataError(f"not a TrueType (glyf) font: {path}")
        faces.append(FontFace(path.stem, path, ttfont))
    return FontCollection(faces)


def is_renderable(codepoint: int, fc: FontCollection) -> bool:
    """True iff at least one font in the collection renders the codepoint."""
    check_scalar(codepoint)
    return fc.font_for(codepoint) is not None


def render(codepoint: int, fc: FontCollection, font_id: str | None = None) -> GlyphBitmap:
    """Rasterize a codepoint to a 64x64 grayscale bitmap.

    Uses the first qualifying font unless font_id pins one. The glyph is
    cropped to its ink, scaled to fit the canvas preserving aspect ratio,
    and centered. Raises DataError when the codepoint is not renderable.
    """
    check_scalar(codepoint)
    if font_id is None:
        font_id = fc.font_for(codepoint)
        if font_id is None:
            raise DataError(f"codepoint U+{to_hex(codepoint)} is not renderable")
    face = fc[font_id]
    if not face.supports(codepoint):
        raise DataError(
            f"codepoint U+{to_hex(codepoint)} is not renderable by font {font_id}"
        )
    mask = face.pil_font().getmask(chr(codepoint), mode="L")
    w, h = mask.size
    if w == 0 or h == 0:
        raise DegenerateError(
            f"blank raster for U+{to_hex(codepoint)} in font {font_id}"
        )
    arr = np.frombuffer(bytes(mask), dtype=np.uint8).reshape(h, w)
    ys, xs = np.nonzero(arr)
    if len(ys) == 0:
        raise DegenerateError(
            f"blank raster for U+{to_hex(codepoint)} in font {font_id}"
        )
    ink = arr[ys.min() : ys.max() + 1, xs.min() : xs.max() + 1]
    ih, iw = ink.shape
    scale = _GLYPH_BOX / max(ih, iw)
    nh = max(1, min(_GLYPH_BOX, round(ih * scale)))
    nw = max(1, min(_GLYPH_BOX, round(iw * scale)))
    resized = Image.fromarray(ink, mode="L").resize((nw, nh), Image.BILINEAR)
    canvas = np.zeros((CANVAS_SIZE, CANVAS_SIZE), dtype=np.uint8)
    top = (CANVAS_SIZE - nh) // 2
    left = (CANVAS_SIZE - nw) // 2
    canvas[top : top + nh, left : left + nw] = np.asarray(resized, dtype=np.uint8)
    pixels = (canvas.astype(np.float32) / 255.0).astype(np.float32)
    return GlyphBitmap(pixels=pixels, codepoint=codepoint, font_id=font_id)


def _affine_matrix(tx, ty, angle_deg, scale, shear_deg, center):
    """Forward 3x3 pixel-space transform about the canvas center."""
    theta = math.radians(angle_deg)
    sh = math.tan(math.radians(shear_deg))
    cos, sin = math.cos(theta), math.sin(theta)
    # rotation @ shear @ scale
    lin = np.array(
        [
            [cos, -sin],
            [sin, cos],
        ]
    ) @ np.array(
        [
            [1.0, sh],
            [0.0, 1.0],
        ]
    ) @ np.array(
        [
            [scale, 0.0],
            [0.0, scale],
        ]
    )
    m = np.eye(3)
    m[:2, :2] = lin
    cy, cx = center
    # conjugate by the center shift, then add the translation
    m[:2, 2] = [
        cy - lin[0, 0] * cy - lin[0, 1] * cx + ty,
        cx - lin[1, 0] * cy - lin[1, 1] * cx + tx,
    ]
    return m


def augment(bitmap: GlyphBitmap, params: AugmentationParams) -> GlyphBitmap:
    """Random affine copy of a bitmap, deterministic given params.seed.

    Samples uniformly from the symmetric ranges; retries (up to 10 draws)
    when the transform pushes all ink off the canvas, then raises
    DegenerateError. Identity params return the input pixels unchanged.
    """
    if params.is_identity:
        return GlyphBitmap(
            pixels=bitmap.pixels.copy(),
            codepoint=bitmap.codepoint,
            font_id=bitmap.font_id,
        )
    rng = np.random.default_rng(params.seed)
    center = ((CANVAS_SIZE - 1) / 2.0, (CANVAS_SIZE - 1) / 2.0)
    lo, hi = params.scale_range
    for _ in range(10):
        tx = rng.uniform(-params.max_translation, params.max_translation)
        ty = rng.uniform(-params.max_translation, params.max_translation)
        angle = rng.uniform(-params.rotation_range, params.rotation_range)
        scale = rng.uniform(lo, hi)
        shear = rng.uniform(-params.shear_range, params.shear_range)
        forward = _affine_matrix(tx, ty, angle, scale, shear, center)
        inverse = np.linalg.inv(forward)
        out = ndimage.affine_transform(
            bitmap.pixels.astype(np.float64),
            inverse[:2, :2],
            offset=inverse[:2, 2],
            order=1,
            mode="constant",
            cval=0.0,
        )
        out = np.clip(out, 0.0, 1.0).astype(np.float32)
        if out.max() > 0.0:
            return GlyphBitmap(
                pixels=out, codepoint=bitmap.codepoint, font_id=bitmap.font_id
            )
    raise DegenerateError(
        f"augmentation pushed all ink off canvas after 10 attempts "
        f"(U+{to_hex(bitmap.codepoint)}, seed={params.seed})"
    )
