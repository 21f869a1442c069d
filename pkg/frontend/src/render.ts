/** Rasterise or serialise a scene and write the image file. */

import { writeFileSync } from "node:fs";
import { extname } from "node:path";

import { loadResultCsvs } from "./csv.js";
import { buildScene, type FigureSpec, type Scene } from "./figure.js";
import { encodePng } from "./png.js";
import { Raster } from "./raster.js";

export function rasterise(scene: Scene): Raster {
  const canvas = new Raster(scene.width, scene.height);
  for (const op of scene.ops) {
    switch (op.kind) {
      case "line":
        canvas.line(op.x0, op.y0, op.x1, op.y1, op.color, op.thickness);
        break;
      case "polyline":
        canvas.polyline(op.points, op.color, op.thickness);
        break;
      case "marker":
        canvas.circle(op.x, op.y, op.radius, op.color);
        break;
      case "text":
        canvas.text(op.x, op.y, op.text, op.color, op.scale);
        break;
    }
  }
  return canvas;
}

function svgColor(c: readonly [number, number, number]): string {
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}

export function sceneToSvg(scene: Scene): string {
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${scene.width}" height="${scene.height}" viewBox="0 0 ${scene.width} ${scene.height}">`,
    `<rect width="${scene.width}" height="${scene.height}" fill="white"/>`,
  ];
  for (const op of scene.ops) {
    switch (op.kind) {
      case "line":
        parts.push(
          `<line x1="${op.x0.toFixed(2)}" y1="${op.y0.toFixed(2)}" x2="${op.x1.toFixed(2)}" y2="${op.y1.toFixed(2)}" stroke="${svgColor(op.color)}" stroke-width="${op.thickness}"/>`,
        );
        break;
      case "polyline": {
        const pts = op.points.map(([x, y]) => `${x.toFixed(2)},${y.toFixed(2)}`).join(" ");
        parts.push(
          `<polyline points="${pts}" fill="none" stroke="${svgColor(op.color)}" stroke-width="${op.thickness}"/>`,
        );
        break;
      }
      case "marker":
        parts.push(
          `<circle cx="${op.x.toFixed(2)}" cy="${op.y.toFixed(2)}" r="${op.radius}" fill="${svgColor(op.color)}"/>`,
        );
        break;
      case "text":
        parts.push(
          `<text x="${op.x.toFixed(2)}" y="${(op.y + 12).toFixed(2)}" font-family="monospace" font-size="${7 * op.scale}" fill="${svgColor(op.color)}">${escapeXml(op.text)}</text>`,
        );
        break;
    }
  }
  parts.push("</svg>");
  return parts.join("\n");
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Load the CSVs, build the scene, and write the image (format follows the
 * output extension: .png rasterised, .svg vector). */
export function render(spec: FigureSpec): Scene {
  const rows = loadResultCsvs(spec.csvPaths);
  const scene = buildScene(rows, spec);
  const ext = extname(spec.outputPath).toLowerCase();
  if (ext === ".svg") {
    writeFileSync(spec.outputPath, sceneToSvg(scene));
  } else if (ext === ".png" || ext === "") {
    const canvas = rasterise(scene);
    writeFileSync(spec.outputPath, encodePng(canvas.width, canvas.height, canvas.pixels));
  } else {
    throw new Error(`unsupported output format '${ext}' (use .png or .svg)`);
  }
  return scene;
}
