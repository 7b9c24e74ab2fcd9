/** Minimal deterministic SVG line charts (no DOM, no dependencies). */

export interface Series {
  label: string;
  x: number[];
  y: number[];
}

export interface ChartOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  logY?: boolean;
  width?: number;
  height?: number;
  equalAspect?: boolean;
}

// fixed palette so re-rendering is byte-identical
const COLORS = ["#1f6fb2", "#c0392b", "#27ae60", "#8e44ad", "#d68910", "#16a085"];

const MARGIN = { left: 72, right: 16, top: 34, bottom: 46 };

interface Scale {
  min: number;
  max: number;
  map(value: number): number;
  ticks(): number[];
}

function niceTicks(min: number, max: number, count = 6): number[] {
  if (!(max > min)) {
    return [min];
  }
  const span = max - min;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const candidates = [step, 2 * step, 5 * step, 10 * step];
  const chosen =
    candidates.find((s) => span / s <= count) ?? candidates[candidates.length - 1];
  const ticks: number[] = [];
  for (let t = Math.ceil(min / chosen) * chosen; t <= max + 1e-12 * span; t += chosen) {
    ticks.push(t);
  }
  return ticks;
}

function linearScale(min: number, max: number, lo: number, hi: number): Scale {
  if (min === max) {
    min -= 1;
    max += 1;
  }
  return {
    min,
    max,
    map: (v) => lo + ((v - min) / (max - min)) * (hi - lo),
    ticks: () => niceTicks(min, max),
  };
}

function logScale(min: number, max: number, lo: number, hi: number): Scale {
  const lmin = Math.log10(min);
  const lmax = Math.log10(max <= min ? min * 10 : max);
  return {
    min,
    max,
    map: (v) => lo + ((Math.log10(v) - lmin) / (lmax - lmin)) * (hi - lo),
    ticks: () => {
      const ticks: number[] = [];
      for (let p = Math.ceil(lmin); p <= Math.floor(lmax); p++) {
        ticks.push(Math.pow(10, p));
      }
      return ticks.length > 0 ? ticks : [min];
    },
  };
}

function fmt(value: number): string {
  if (value === 0) {
    return "0";
  }
  const magnitude = Math.abs(value);
  if (magnitude >= 1e4 || magnitude < 1e-3) {
    return value.toExponential(1);
  }
  return String(Number(value.toPrecision(6)));
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderChart(options: ChartOptions): string {
  const width = options.width ?? 760;
  const height = options.height ?? 420;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  const xs = options.series.flatMap((s) => s.x);
  let ys = options.series.flatMap((s) => s.y);
  if (options.logY) {
    ys = ys.filter((y) => y > 0);
    if (ys.length === 0) {
      ys = [1e-300, 1e-299];
    }
  }
  let xMin = Math.min(...xs);
  let xMax = Math.max(...xs);
  let yMin = Math.min(...ys);
  let yMax = Math.max(...ys);
  if (options.equalAspect) {
    const span = Math.max(xMax - xMin, yMax - yMin, 1e-300);
    const xMid = (xMin + xMax) / 2;
    const yMid = (yMin + yMax) / 2;
    xMin = xMid - span / 2;
    xMax = xMid + span / 2;
    yMin = yMid - span / 2;
    yMax = yMid + span / 2;
  }

  const sx = linearScale(xMin, xMax, MARGIN.left, MARGIN.left + plotW);
  const sy = options.logY
    ? logScale(yMin, yMax, MARGIN.top + plotH, MARGIN.top)
    : linearScale(yMin, yMax, MARGIN.top + plotH, MARGIN.top);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(
    `<text x="${width / 2}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">${escapeXml(options.title)}</text>`
  );

  // axes frame
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#444"/>`
  );
  for (const t of sx.ticks()) {
    const px = sx.map(t);
    parts.push(
      `<line x1="${px.toFixed(2)}" y1="${MARGIN.top + plotH}" x2="${px.toFixed(2)}" y2="${MARGIN.top + plotH + 5}" stroke="#444"/>`
    );
    parts.push(
      `<text x="${px.toFixed(2)}" y="${MARGIN.top + plotH + 18}" text-anchor="middle" font-family="sans-serif" font-size="10">${fmt(t)}</text>`
    );
  }
  for (const t of sy.ticks()) {
    const py = sy.map(t);
    parts.push(
      `<line x1="${MARGIN.left - 5}" y1="${py.toFixed(2)}" x2="${MARGIN.left}" y2="${py.toFixed(2)}" stroke="#444"/>`
    );
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${(py + 3).toFixed(2)}" text-anchor="end" font-family="sans-serif" font-size="10">${fmt(t)}</text>`
    );
  }
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${height - 10}" text-anchor="middle" font-family="sans-serif" font-size="12">${escapeXml(options.xLabel)}</text>`
  );
  parts.push(
    `<text x="16" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 ${MARGIN.top + plotH / 2})">${escapeXml(options.yLabel)}</text>`
  );

  options.series.forEach((series, k) => {
    const color = COLORS[k % COLORS.length];
    const points: string[] = [];
    for (let i = 0; i < series.x.length; i++) {
      const y = series.y[i];
      if (options.logY && !(y > 0)) {
        continue;
      }
      points.push(`${sx.map(series.x[i]).toFixed(2)},${sy.map(y).toFixed(2)}`);
    }
    parts.push(
      `<polyline fill="none" stroke="${color}" stroke-width="1.2" points="${points.join(" ")}"/>`
    );
    parts.push(
      `<text x="${MARGIN.left + plotW - 8}" y="${MARGIN.top + 14 + 14 * k}" text-anchor="end" font-family="sans-serif" font-size="11" fill="${color}">${escapeXml(series.label)}</text>`
    );
  });

  parts.push("</svg>");
  return parts.join("\n");
}

/** Two stacked charts in one SVG (used by the orbital-elements plot). */
export function renderStacked(top: ChartOptions, bottom: ChartOptions): string {
  const width = top.width ?? 760;
  const height = (top.height ?? 420) + (bottom.height ?? 420);
  const first = renderChart(top);
  const second = renderChart(bottom);
  const inner = (svg: string) => svg.replace(/<svg[^>]*>/, "").replace("</svg>", "");
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<g>${inner(first)}</g>`,
    `<g transform="translate(0 ${top.height ?? 420})">${inner(second)}</g>`,
    "</svg>",
  ].join("\n");
}
