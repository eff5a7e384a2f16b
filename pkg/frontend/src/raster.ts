/**
 * Glyph raster loading.
 *
 * The toolkit's render command dumps one 8-bit grayscale PNG per
 * codepoint and qualifying font, named `<hex codepoint>_<font id>.png`.
 * That file set is the training-data surface this package consumes.
 */
import * as fs from "fs";
import * as path from "path";
import { PNG } from "pngjs";

export interface Raster {
  codepoint: number;
  fontId: string;
  size: number; // square side length in pixels
  pixels: Float32Array; // row-major, [0, 1]
}

const NAME_PATTERN = /^([0-9A-Fa-f]{4,6})_(.+)\.png$/;

export function loadRasterFile(filePath: string): Raster {
  const name = path.basename(filePath);
  const match = NAME_PATTERN.exec(name);
  if (!match) {
    throw new Error(`raster file name not <hex>_<font>.png: ${name}`);
  }
  const codepoint = parseInt(match[1], 16);
  const fontId = match[2];
  const png = PNG.sync.read(fs.readFileSync(filePath));
  if (png.width !== png.height) {
    throw new Error(`raster must be square, got ${png.width}x${png.height}`);
  }
  const n = png.width * png.height;
  const pixels = new Float32Array(n);
  for (let i = 0; i < n; i++) {
    // pngjs expands grayscale to RGBA; channels are equal, take red
    pixels[i] = png.data[i * 4] / 255;
  }
  return { codepoint, fontId, size: png.width, pixels };
}

export type RasterIndex = Map<number, Raster[]>;

/** Load a dump directory into codepoint -> rasters (sorted by font id). */
export function loadRasterDir(dir: string): RasterIndex {
  const index: RasterIndex = new Map();
  const files = fs
    .readdirSync(dir)
    .filter((f) => f.endsWith(".png"))
    .sort();
  for (const file of files) {
    const raster = loadRasterFile(path.join(dir, file));
    const list = index.get(raster.codepoint) ?? [];
    list.push(raster);
    index.set(raster.codepoint, list);
  }
  for (const list of index.values()) {
    list.sort((a, b) => (a.fontId < b.fontId ? -1 : a.fontId > b.fontId ? 1 : 0));
  }
  if (index.size === 0) {
    throw new Error(`no rasters found in ${dir}`);
  }
  return index;
}
