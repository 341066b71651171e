import { JobProgress, PlatformApi } from "../api";

/**
 * Result page: one progress bar per selected detector, updated by polling
 * the progress endpoint without a page reload. Completed jobs move to a
 * "Completed" tab with their score and report link; failed jobs get an
 * error badge and no score. Polling stops once every job is terminal.
 */

export const POLL_INTERVAL_MS = 2000;

const TERMINAL_STATES = new Set(["completed", "failed"]);

export const SCORE_CAVEAT =
  "The likelihood shown is a statistical signal and should not be " +
  "considered as providing a deterministic result.";

export function allTerminal(views: JobProgress[]): boolean {
  return views.every((view) => TERMINAL_STATES.has(view.state));
}

/** Pure render: same progress fixtures always produce the same DOM. */
export function renderProgress(container: HTMLElement, views: JobProgress[]): void {
  container.innerHTML = "";

  const running = document.createElement("section");
  running.id = "running-jobs";
  const completed = document.createElement("section");
  completed.id = "completed-jobs";
  const completedHeading = document.createElement("h2");
  completedHeading.textContent = "Completed";
  completed.appendChild(completedHeading);

  for (const view of views) {
    const row = document.createElement("div");
    row.className = "job-row";
    row.dataset.jobId = view.job_id;
    row.dataset.state = view.state;

    const name = document.createElement("span");
    name.className = "job-detector";
    name.textContent = view.detector_id;
    row.appendChild(name);

    if (view.state === "completed") {
      const score = document.createElement("span");
      score.className = "job-score";
      score.textContent = `fake likelihood ${(view.score! * 100).toFixed(1)}%`;
      row.appendChild(score);
      const link = document.createElement("a");
      link.className = "report-link";
      link.href = view.result_link ?? "#";
      link.textContent = "view report";
      row.appendChild(link);
      completed.appendChild(row);
    } else if (view.state === "failed") {
      const badge = document.createElement("span");
      badge.className = "error-badge";
      badge.textContent = view.error ?? "failed";
      row.appendChild(badge);
      completed.appendChild(row);
    } else {
      const track = document.createElement("div");
      track.className = "progress-track";
      const bar = document.createElement("div");
      bar.className = "progress-bar";
      bar.style.width = `${view.percent}%`;
      bar.setAttribute("aria-valuenow", String(view.percent));
      track.appendChild(bar);
      row.appendChild(track);
      const eta = document.createElement("span");
      eta.className = "job-eta";
      eta.textContent = `about ${Math.ceil(view.eta_seconds)}s left`;
      row.appendChild(eta);
      running.appendChild(row);
    }
  }

  const caveat = document.createElement("p");
  caveat.className = "score-caveat";
  caveat.textContent = SCORE_CAVEAT;

  container.appendChild(running);
  container.appendChild(completed);
  container.appendChild(caveat);
}

export function renderResults(
  root: HTMLElement,
  api: PlatformApi,
  taskId: string,
  intervalMs = POLL_INTERVAL_MS,
): () => void {
  root.innerHTML = `<h1>Task ${taskId}</h1><div id="progress-root"></div>`;
  const container = root.querySelector("#progress-root") as HTMLElement;

  let stopped = false;
  let delay = intervalMs;
  let timer: ReturnType<typeof setTimeout> | null = null;

  async function tick(): Promise<void> {
    if (stopped) return;
    try {
      const views = await api.progress(taskId);
      renderProgress(container, views);
      if (allTerminal(views)) return;
      delay = intervalMs;
    } catch {
      delay = Math.min(delay * 2, 30_000); // back off on network trouble
    }
    timer = setTimeout(() => void tick(), delay);
  }

  void tick();
  return () => {
    stopped = true;
    if (timer !== null) clearTimeout(timer);
  };
}
