import { PlatformApi, ReportRow, TaskReport } from "../api";
import { SCORE_CAVEAT } from "./results";

/**
 * Detailed report page: per-detector score, method metadata, paper and
 * source-code links, and any advanced payloads. Frame-level scores are
 * drawn as a small SVG line chart.
 */

const SVG_NS = "http://www.w3.org/2000/svg";
const CHART_WIDTH = 320;
const CHART_HEIGHT = 80;

export function frameScoreChart(scores: number[]): SVGSVGElement {
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("class", "frame-chart");
  svg.setAttribute("viewBox", `0 0 ${CHART_WIDTH} ${CHART_HEIGHT}`);
  const step = scores.length > 1 ? CHART_WIDTH / (scores.length - 1) : 0;
  const points = scores
    .map((s, i) => `${(i * step).toFixed(1)},${((1 - s) * CHART_HEIGHT).toFixed(1)}`)
    .join(" ");
  const line = document.createElementNS(SVG_NS, "polyline");
  line.setAttribute("points", points);
  line.setAttribute("fill", "none");
  line.setAttribute("stroke", "currentColor");
  svg.appendChild(line);
  return svg;
}

function renderRow(row: ReportRow): HTMLElement {
  const card = document.createElement("article");
  card.className = "report-card";
  card.dataset.detectorId = row.detector_id;

  const heading = document.createElement("h3");
  heading.textContent = `${row.name} (${row.year}, ${row.organization})`;
  card.appendChild(heading);

  const scope = document.createElement("p");
  scope.className = "report-scope";
  scope.textContent = row.scope;
  card.appendChild(scope);

  if (row.state === "completed" && row.score !== null) {
    const score = document.createElement("p");
    score.className = "report-score";
    score.textContent = `fake likelihood ${(row.score * 100).toFixed(1)}%`;
    card.appendChild(score);
  } else if (row.state === "failed") {
    const badge = document.createElement("p");
    badge.className = "error-badge";
    badge.textContent = row.error ?? "failed";
    card.appendChild(badge);
  } else {
    const pending = document.createElement("p");
    pending.className = "report-pending";
    pending.textContent = "still processing";
    card.appendChild(pending);
  }

  const links = document.createElement("p");
  const paper = document.createElement("a");
  paper.href = row.reference_url;
  paper.textContent = "paper";
  const code = document.createElement("a");
  code.href = row.repository_url;
  code.textContent = "source code";
  links.appendChild(paper);
  links.appendChild(document.createTextNode(" · "));
  links.appendChild(code);
  card.appendChild(links);

  if (row.frame_scores && row.frame_scores.length > 0) {
    card.appendChild(frameScoreChart(row.frame_scores));
  }
  if (row.advanced && Object.keys(row.advanced).length > 0) {
    const advanced = document.createElement("pre");
    advanced.className = "report-advanced";
    advanced.textContent = JSON.stringify(row.advanced, null, 2);
    card.appendChild(advanced);
  }
  return card;
}

export function renderReportView(container: HTMLElement, report: TaskReport): void {
  container.innerHTML = "";
  const heading = document.createElement("h1");
  heading.textContent = `Report for ${report.file}`;
  container.appendChild(heading);
  const when = document.createElement("p");
  when.className = "report-submitted";
  when.textContent = `Submitted ${report.submitted_at}`;
  container.appendChild(when);
  for (const row of report.detectors) {
    container.appendChild(renderRow(row));
  }
  const caveat = document.createElement("p");
  caveat.className = "score-caveat";
  caveat.textContent = SCORE_CAVEAT;
  container.appendChild(caveat);
}

export async function renderReport(
  root: HTMLElement,
  api: PlatformApi,
  taskId: string,
): Promise<void> {
  const report = await api.report(taskId);
  renderReportView(root, report);
}
