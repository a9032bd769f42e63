/**
 * Subgraph panel: renders exactly the nodes and edges of the response
 * payload as SVG, nothing inferred client-side. The query node sits in
 * the middle, everything else on a ring in payload order; hovering an
 * edge shows its weight and provenance via the native tooltip.
 */

import { SubgraphEdgeT, SubgraphNodeT, SubgraphT } from "./schema.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 640;
const HEIGHT = 420;
const LABEL_MAX = 24;

export function layoutNodes(nodes: SubgraphNodeT[]): Map<string, { x: number; y: number }> {
  const positions = new Map<string, { x: number; y: number }>();
  const ring = nodes.filter((n) => n.tag !== "query");
  const cx = WIDTH / 2;
  const cy = HEIGHT / 2;
  const radius = Math.min(WIDTH, HEIGHT) / 2 - 60;
  ring.forEach((node, i) => {
    const angle = (2 * Math.PI * i) / ring.length - Math.PI / 2;
    positions.set(node.id, {
      x: cx + radius * Math.cos(angle),
      y: cy + radius * Math.sin(angle),
    });
  });
  for (const node of nodes) {
    if (node.tag === "query") positions.set(node.id, { x: cx, y: cy });
  }
  return positions;
}

function edgeTooltip(edge: SubgraphEdgeT): string {
  const level = edge.level === "query" ? "query match" : `level ${edge.level}`;
  const provenance = edge.provenance.length > 0 ? `, shared: ${edge.provenance.join(", ")}` : "";
  return `${level}, weight ${edge.weight.toFixed(3)}${provenance}`;
}

export function renderSubgraph(host: HTMLElement, subgraph: SubgraphT): void {
  host.textContent = "";
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
  svg.setAttribute("role", "img");

  const positions = layoutNodes(subgraph.nodes);

  for (const edge of subgraph.edges) {
    const a = positions.get(edge.src);
    const b = positions.get(edge.dst);
    if (a === undefined || b === undefined) continue;
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(a.x));
    line.setAttribute("y1", String(a.y));
    line.setAttribute("x2", String(b.x));
    line.setAttribute("y2", String(b.y));
    line.setAttribute("class", edge.level === "query" ? "gedge gedge-query" : "gedge");
    line.setAttribute("stroke-width", String(1 + 3 * edge.weight));
    line.dataset.src = edge.src;
    line.dataset.dst = edge.dst;
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = edgeTooltip(edge);
    line.appendChild(title);
    svg.appendChild(line);
  }

  for (const node of subgraph.nodes) {
    const pos = positions.get(node.id);
    if (pos === undefined) continue;
    const group = document.createElementNS(SVG_NS, "g");
    group.setAttribute("class", `gnode gnode-${node.tag}`);
    group.dataset.id = node.id;

    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("cx", String(pos.x));
    circle.setAttribute("cy", String(pos.y));
    circle.setAttribute("r", node.tag === "query" ? "14" : "9");

    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(pos.x));
    label.setAttribute("y", String(pos.y - 14));
    label.setAttribute("text-anchor", "middle");
    label.textContent =
      node.label.length > LABEL_MAX ? `${node.label.slice(0, LABEL_MAX - 3)}...` : node.label;

    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = `${node.kind}: ${node.label}`;

    group.append(title, circle, label);
    svg.appendChild(group);
  }

  host.appendChild(svg);
}
