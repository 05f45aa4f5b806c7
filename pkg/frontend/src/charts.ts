// Chart rendering as plain data. renderChart() turns a result table into a
// VNode tree; mount() realizes a tree as DOM. Keeping the tree inert makes
// every view inspectable in tests without a browser.
//
// The renderers draw exactly what the service returned. No client-side
// aggregation, no resorting, no bucketing.

import type { ChartType, ResultTable } from "./types.js";

export interface VNode {
  tag: string;
  attrs: Record<string, string>;
  on?: Record<string, (event: Event) => void>;
  children: (VNode | string)[];
}

export function h(
  tag: string,
  attrs: Record<string, string> = {},
  ...children: (VNode | string)[]
): VNode {
  return { tag, attrs, children };
}

export function withHandlers(node: VNode, on: Record<string, (event: Event) => void>): VNode {
  return { ...node, on };
}

const SVG_TAGS = new Set(["svg", "path", "rect", "circle", "polyline", "line", "text", "g"]);

export function mount(node: VNode | string, doc: Document = document): Node {
  if (typeof node === "string") return doc.createTextNode(node);
  const element = SVG_TAGS.has(node.tag)
    ? doc.createElementNS("http://www.w3.org/2000/svg", node.tag)
    : doc.createElement(node.tag);
  for (const [name, value] of Object.entries(node.attrs)) {
    element.setAttribute(name, value);
  }
  if (node.on) {
    for (const [event, handler] of Object.entries(node.on)) {
      element.addEventListener(event, handler);
    }
  }
  for (const child of node.children) {
    element.appendChild(mount(child, doc));
  }
  return element;
}

// Depth-first search helpers used by the app and the tests.

export function findAll(node: VNode | string, pred: (n: VNode) => boolean): VNode[] {
  if (typeof node === "string") return [];
  const hits: VNode[] = [];
  if (pred(node)) hits.push(node);
  for (const child of node.children) {
    hits.push(...findAll(child, pred));
  }
  return hits;
}

export function textOf(node: VNode | string): string {
  if (typeof node === "string") return node;
  return node.children.map(textOf).join("");
}

function formatCell(value: string | number | null): string {
  if (value === null) return "";
  return String(value);
}

function lastColumnValues(result: ResultTable): number[] {
  return result.rows.map((row) => {
    const v = row[row.length - 1];
    return typeof v === "number" ? v : Number(v);
  });
}

const PALETTE = [
  "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
  "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
];

function placeholder(): VNode {
  return h("div", { class: "placeholder" }, "no data");
}

function renderTable(result: ResultTable): VNode {
  return h(
    "table",
    { class: "result-table" },
    h("thead", {}, h("tr", {}, ...result.header.map((name) => h("th", {}, name)))),
    h(
      "tbody",
      {},
      ...result.rows.map((row) =>
        h("tr", {}, ...row.map((cell) => h("td", {}, formatCell(cell)))),
      ),
    ),
  );
}

function renderPie(result: ResultTable): VNode {
  const values = lastColumnValues(result);
  const total = values.reduce((a, b) => a + b, 0);
  const slices: VNode[] = [];
  const legend: VNode[] = [];
  const cx = 100;
  const cy = 100;
  const r = 90;
  let angle = -Math.PI / 2;
  result.rows.forEach((row, i) => {
    const label = formatCell(row[0]);
    const share = total > 0 ? values[i] / total : 0;
    const sweep = share * 2 * Math.PI;
    const x1 = cx + r * Math.cos(angle);
    const y1 = cy + r * Math.sin(angle);
    angle += sweep;
    const x2 = cx + r * Math.cos(angle);
    const y2 = cy + r * Math.sin(angle);
    const large = sweep > Math.PI ? 1 : 0;
    const color = PALETTE[i % PALETTE.length];
    // one slice per result row, even zero-count ones, so slices never
    // outnumber rows and the legend lines up with the table
    slices.push(
      h("path", {
        class: "slice",
        d: `M ${cx} ${cy} L ${x1} ${y1} A ${r} ${r} 0 ${large} 1 ${x2} ${y2} Z`,
        fill: color,
        "data-label": label,
        "data-value": String(values[i]),
      }),
    );
    legend.push(
      h("li", { class: "legend-entry", style: `--swatch:${color}` }, `${label}: ${formatCell(row[row.length - 1])}`),
    );
  });
  return h(
    "figure",
    { class: "chart chart-pie" },
    h("svg", { viewBox: "0 0 200 200", width: "200", height: "200" }, ...slices),
    h("ul", { class: "legend" }, ...legend),
  );
}

// One group per distinct first-column value; with two label columns the
// second becomes the series, which is what a two-dimension query produces.
function renderBar(result: ResultTable): VNode {
  const labelColumns = result.header.length - 1;
  const values = lastColumnValues(result);
  const max = Math.max(...values, 1);
  const groups = new Map<string, { series: string; value: number }[]>();
  result.rows.forEach((row, i) => {
    const group = formatCell(row[0]);
    const series = labelColumns >= 2 ? formatCell(row[1]) : result.header[result.header.length - 1];
    if (!groups.has(group)) groups.set(group, []);
    groups.get(group)!.push({ series, value: values[i] });
  });
  const width = 400;
  const height = 200;
  const groupWidth = width / groups.size;
  const bars: VNode[] = [];
  const labels: VNode[] = [];
  const seriesNames = [...new Set(result.rows.map((row, i) =>
    labelColumns >= 2 ? formatCell(row[1]) : result.header[result.header.length - 1]))];
  let g = 0;
  for (const [group, entries] of groups) {
    const barWidth = (groupWidth * 0.8) / entries.length;
    entries.forEach((entry, j) => {
      const barHeight = (entry.value / max) * (height - 20);
      const x = g * groupWidth + groupWidth * 0.1 + j * barWidth;
      bars.push(
        h("rect", {
          class: "bar",
          x: x.toFixed(2),
          y: (height - barHeight).toFixed(2),
          width: barWidth.toFixed(2),
          height: barHeight.toFixed(2),
          fill: PALETTE[seriesNames.indexOf(entry.series) % PALETTE.length],
          "data-group": group,
          "data-series": entry.series,
          "data-value": String(entry.value),
        }),
      );
    });
    labels.push(
      h("text", {
        class: "group-label",
        x: (g * groupWidth + groupWidth / 2).toFixed(2),
        y: String(height + 14),
        "text-anchor": "middle",
      }, group),
    );
    g += 1;
  }
  const legend = seriesNames.map((name, i) =>
    h("li", { class: "legend-entry", style: `--swatch:${PALETTE[i % PALETTE.length]}` }, name));
  return h(
    "figure",
    { class: "chart chart-bar" },
    h("svg", { viewBox: `0 0 ${width} ${height + 20}`, width: String(width), height: String(height + 20) }, ...bars, ...labels),
    h("ul", { class: "legend" }, ...legend),
  );
}

function renderLine(result: ResultTable): VNode {
  const values = lastColumnValues(result);
  const max = Math.max(...values, 1);
  const width = 400;
  const height = 200;
  const step = result.rows.length > 1 ? width / (result.rows.length - 1) : 0;
  const points = values.map((v, i) => {
    const x = result.rows.length > 1 ? i * step : width / 2;
    const y = height - (v / max) * (height - 20);
    return `${x.toFixed(2)},${y.toFixed(2)}`;
  });
  const dots = values.map((v, i) => {
    const [x, y] = points[i].split(",");
    return h("circle", {
      class: "point",
      cx: x,
      cy: y,
      r: "3",
      fill: PALETTE[0],
      "data-label": formatCell(result.rows[i][0]),
      "data-value": String(v),
    });
  });
  return h(
    "figure",
    { class: "chart chart-line" },
    h(
      "svg",
      { viewBox: `0 0 ${width} ${height}`, width: String(width), height: String(height) },
      h("polyline", {
        class: "line-path",
        points: points.join(" "),
        fill: "none",
        stroke: PALETTE[0],
        "stroke-width": "2",
      }),
      ...dots,
    ),
  );
}

export function renderChart(result: ResultTable, chartType: ChartType): VNode {
  if (result.rows.length === 0) return placeholder();
  switch (chartType) {
    case "table":
      return renderTable(result);
    case "pie":
      return renderPie(result);
    case "bar":
      return renderBar(result);
    case "line":
      return renderLine(result);
  }
}
