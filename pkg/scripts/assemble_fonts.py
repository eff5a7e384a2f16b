#!/usr/bin/env python3
"""One-time assembly of the bundled Noto font collection.

Downloads @fontsource/* v4 packages (which ship complete WOFF builds of
the Google Noto fonts), converts each package's ``<name>-all-400-normal``
WOFF to plain TrueType with fontTools, and subsets the three CJK
megafonts to the blocks the confusables snapshot actually touches so the
repository stays a reasonable size.

Needs network access to an npm registry; the repository already contains
the converted output under data/fonts/, so running this again is only
necessary to refresh the collection.

Usage: python scripts/assemble_fonts.py <workdir> <output-dir>
"""

import subprocess
import sys
import tarfile
from pathlib import Path

from fontTools import subset
from fontTools.pens.cu2quPen import Cu2QuPen
from fontTools.pens.ttGlyphPen import TTGlyphPen
from fontTools.ttLib import TTFont, newTable

# max cubic->quadratic conversion error, in font units
_CU2QU_MAX_ERR = 1.0

SCRIPT_PACKAGES = [
    "noto-sans", "noto-sans-arabic", "noto-sans-armenian", "noto-sans-balinese",
    "noto-sans-bamum", "noto-sans-bengali", "noto-sans-buginese", "noto-sans-buhid",
    "noto-sans-canadian-aboriginal", "noto-sans-carian", "noto-sans-cham",
    "noto-sans-cherokee", "noto-sans-coptic", "noto-sans-deseret",
    "noto-sans-devanagari", "noto-sans-ethiopic", "noto-sans-georgian",
    "noto-sans-glagolitic", "noto-sans-gothic", "noto-sans-gujarati",
    "noto-sans-gurmukhi", "noto-sans-hanunoo", "noto-sans-hebrew",
    "noto-sans-javanese", "noto-sans-kannada", "noto-sans-kayah-li",
    "noto-sans-kharoshthi", "noto-sans-khmer", "noto-sans-lao", "noto-sans-lepcha",
    "noto-sans-limbu", "noto-sans-lisu", "noto-sans-lycian", "noto-sans-malayalam",
    "noto-sans-math", "noto-sans-meetei-mayek", "noto-sans-miao",
    "noto-sans-mongolian", "noto-sans-myanmar", "noto-sans-new-tai-lue",
    "noto-sans-ol-chiki", "noto-sans-old-italic", "noto-sans-old-persian",
    "noto-sans-oriya", "noto-sans-osage", "noto-sans-osmanya",
    "noto-sans-phoenician", "noto-sans-rejang", "noto-sans-runic",
    "noto-sans-samaritan", "noto-sans-saurashtra", "noto-sans-shavian",
    "noto-sans-siddham", "noto-sans-sinhala", "noto-sans-sundanese",
    "noto-sans-symbols", "noto-sans-symbols-2", "noto-sans-syriac",
    "noto-sans-tagalog", "noto-sans-tagbanwa", "noto-sans-tai-le",
    "noto-sans-tai-tham", "noto-sans-tai-viet", "noto-sans-tamil",
    "noto-sans-telugu", "noto-sans-thaana", "noto-sans-thai",
    "noto-sans-tifinagh", "noto-sans-tirhuta", "noto-sans-vai",
    "noto-sans-warang-citi", "noto-sans-yi",
]
CJK_PACKAGES = ["noto-sans-sc", "noto-sans-jp", "noto-sans-kr"]

# Blocks kept in the CJK fonts: radicals, compatibility ideographs, kana,
# jamo, fullwidth forms, enclosed/compat blocks, plus every codepoint the
# confusables snapshot mentions.
CJK_KEEP_BLOCKS = [
    (0x1100, 0x11FF), (0x2E80, 0x2EFF), (0x2F00, 0x2FDF), (0x3000, 0x303F),
    (0x3040, 0x309F), (0x30A0, 0x30FF), (0x3130, 0x318F), (0x31F0, 0x31FF),
    (0x3200, 0x32FF), (0x3300, 0x33FF), (0xA960, 0xA97F), (0xF900, 0xFAFF),
    (0xFE30, 0xFE4F), (0xFF00, 0xFFEF),
]


def fetch_woff(name: str, workdir: Path) -> Path | None:
    out = workdir / f"{name}.woff"
    if out.exists():
        return out
    versions = subprocess.run(
        ["npm", "view", f"@fontsource/{name}", "versions", "--json"],
        capture_output=True, text=True,
    ).stdout
    v4 = [v.strip(' "') for v in versions.strip("[]\n").split(",") if v.strip(' "').startswith("4.")]
    if not v4:
        print(f"skip {name}: no v4 release")
        return None
    tgz = subprocess.run(
        ["npm", "pack", f"@fontsource/{name}@{v4[-1]}", "--silent"],
        capture_output=True, text=True, cwd=workdir,
    ).stdout.strip().splitlines()[-1]
    member = f"package/files/{name}-all-400-normal.woff"
    with tarfile.open(workdir / tgz) as tf:
        with tf.extractfile(member) as src, open(out, "wb") as dst:
            dst.write(src.read())
    (workdir / tgz).unlink()
    return out


def snapshot_codepoints(confusables_path: Path) -> set[int]:
    keep = set()
    for line in confusables_path.read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        for fld in line.split(";")[:2]:
            keep.update(int(tok, 16) for tok in fld.split())
    return keep


def otf_to_ttf(font: TTFont) -> None:
    """Convert CFF outlines to quadratic glyf outlines, in place."""
    glyph_order = font.getGlyphOrder()
    glyph_set = font.getGlyphSet()
    glyf = newTable("glyf")
    glyf.glyphOrder = glyph_order
    glyf.glyphs = {}
    for name in glyph_order:
        pen = TTGlyphPen(glyph_set)
        cu2qu = Cu2QuPen(pen, max_err=_CU2QU_MAX_ERR, reverse_direction=True)
        glyph_set[name].draw(cu2qu)
        glyf[name] = pen.glyph()
    font["glyf"] = glyf
    font["loca"] = newTable("loca")

    maxp = newTable("maxp")
    maxp.tableVersion = 0x00010000
    maxp.numGlyphs = len(glyph_order)
    for attr in (
        "maxPoints", "maxContours", "maxCompositePoints", "maxCompositeContours",
        "maxZones", "maxTwilightPoints", "maxStorage", "maxFunctionDefs",
        "maxInstructionDefs", "maxStackElements", "maxSizeOfInstructions",
        "maxComponentElements", "maxComponentDepth",
    ):
        setattr(maxp, attr, 0)
    maxp.maxZones = 1
    font["maxp"] = maxp

    post = font["post"]
    post.formatType = 2.0
    post.extraNames = []
    post.mapping = {}
    post.glyphOrder = glyph_order

    hmtx = font["hmtx"]
    for name in glyph_order:
        glyph = glyf[name]
        if hasattr(glyph, "xMin"):
            advance, _ = hmtx[name]
            hmtx[name] = (advance, glyph.xMin)

    for tag in ("CFF ", "VORG"):
        if tag in font:
            del font[tag]
    font.sfntVersion = "\x00\x01\x00\x00"


def convert(woff: Path, out_dir: Path, cjk_keep: set[int] | None) -> Path:
    font = TTFont(str(woff))
    font.flavor = None
    out = out_dir / f"{woff.stem}.ttf"
    if cjk_keep is not None:
        options = subset.Options()
        options.layout_features = ["*"]
        options.name_IDs = ["*"]
        options.notdef_outline = True
        subsetter = subset.Subsetter(options=options)
        subsetter.populate(unicodes=sorted(cjk_keep))
        subsetter.subset(font)
    if font.sfntVersion == "OTTO":
        otf_to_ttf(font)
    font.save(str(out))
    return out


def main() -> int:
    workdir = Path(sys.argv[1])
    out_dir = Path(sys.argv[2])
    workdir.mkdir(parents=True, exist_ok=True)
    out_dir.mkdir(parents=True, exist_ok=True)
    keep = snapshot_codepoints(Path(__file__).resolve().parents[1] / "data" / "confusables.txt")
    for start, end in CJK_KEEP_BLOCKS:
        keep.update(range(start, end + 1))
    for name in SCRIPT_PACKAGES + CJK_PACKAGES:
        woff = fetch_woff(name, workdir)
        if woff is None:
            continue
        cjk_keep = keep if name in CJK_PACKAGES else None
        out = convert(woff, out_dir, cjk_keep)
        print(f"{out.name}: {out.stat().st_size // 1024} KiB")
    return 0


if __name__ == "__main__":
    sys.exit(main())
