import { HistoryPage, PlatformApi } from "../api";

/**
 * Submission history: a paginated four-column table of submission time,
 * sample preview, result link, and processing status. Images get a
 * thumbnail; audio and video get a static icon.
 */

const ICONS: Record<string, string> = { video: "🎬", audio: "🔊" };

export function renderHistoryView(
  container: HTMLElement,
  page: HistoryPage,
  onPage?: (page: number) => void,
): void {
  container.innerHTML = "";

  const table = document.createElement("table");
  table.id = "history-table";
  const head = document.createElement("tr");
  for (const title of ["Submission Time", "Sample Preview", "Result Link", "Processing Status"]) {
    const cell = document.createElement("th");
    cell.textContent = title;
    head.appendChild(cell);
  }
  table.appendChild(head);

  for (const entry of page.entries) {
    const row = document.createElement("tr");
    row.dataset.taskId = entry.task_id;

    const when = document.createElement("td");
    when.textContent = entry.submitted_at;
    row.appendChild(when);

    const preview = document.createElement("td");
    if (entry.file_preview.modality === "image") {
      const thumb = document.createElement("img");
      thumb.className = "preview-thumb";
      thumb.src = entry.file_preview.stored_path;
      thumb.alt = entry.file_preview.original_name;
      preview.appendChild(thumb);
    } else {
      const icon = document.createElement("span");
      icon.className = "preview-icon";
      icon.textContent = ICONS[entry.file_preview.modality] ?? "📄";
      icon.title = entry.file_preview.original_name;
      preview.appendChild(icon);
    }
    row.appendChild(preview);

    const link = document.createElement("td");
    const anchor = document.createElement("a");
    anchor.href = `#/tasks/${entry.task_id}/report`;
    anchor.textContent = "result";
    link.appendChild(anchor);
    row.appendChild(link);

    const status = document.createElement("td");
    status.className = `status status--${entry.status.toLowerCase()}`;
    status.textContent = entry.status;
    row.appendChild(status);

    table.appendChild(row);
  }
  container.appendChild(table);

  const pager = document.createElement("nav");
  pager.id = "history-pager";
  const label = document.createElement("span");
  label.textContent = `Page ${page.page} of ${Math.max(page.pages, 1)}`;
  pager.appendChild(label);
  if (onPage) {
    const prev = document.createElement("button");
    prev.textContent = "Previous";
    prev.disabled = page.page <= 1;
    prev.addEventListener("click", () => onPage(page.page - 1));
    const next = document.createElement("button");
    next.textContent = "Next";
    next.disabled = page.page >= page.pages;
    next.addEventListener("click", () => onPage(page.page + 1));
    pager.appendChild(prev);
    pager.appendChild(next);
  }
  container.appendChild(pager);
}

export async function renderHistory(
  root: HTMLElement,
  api: PlatformApi,
  pageNumber = 1,
): Promise<void> {
  const page = await api.submissions(pageNumber);
  renderHistoryView(root, page, (next) => void renderHistory(root, api, next));
}
