import { DetectorInfo, PlatformApi } from "../api";
import { Modality, modalityOf } from "../modality";

/**
 * Homepage: drag-and-drop (or click-to-select) upload area, a detector list
 * filtered to the chosen file's modality, and the supplementary-info form.
 * The file can be replaced any time before submit by dropping or picking
 * another one; the detector list refreshes to match.
 */

export type UploadState = "Selecting" | "Uploading" | "Submitted";

export interface HomeState {
  file: File | null;
  modality: Modality | null;
  uploadState: UploadState;
}

export function renderDetectorList(container: HTMLElement, detectors: DetectorInfo[]): void {
  container.innerHTML = "";
  const list = document.createElement("ul");
  list.className = "detector-list";
  for (const d of detectors) {
    const item = document.createElement("li");
    item.dataset.detectorId = d.id;

    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.value = d.id;
    box.className = "detector-checkbox";
    label.appendChild(box);
    label.appendChild(document.createTextNode(` ${d.name} (${d.year}, ${d.organization})`));
    item.appendChild(label);

    const paper = document.createElement("a");
    paper.href = d.reference_url;
    paper.textContent = "paper";
    paper.className = "detector-link";
    const code = document.createElement("a");
    code.href = d.repository_url;
    code.textContent = "code";
    code.className = "detector-link";
    item.appendChild(paper);
    item.appendChild(code);
    list.appendChild(item);
  }
  container.appendChild(list);
}

export function renderHome(root: HTMLElement, api: PlatformApi): HomeState {
  const state: HomeState = { file: null, modality: null, uploadState: "Selecting" };

  root.innerHTML = `
    <section id="upload-area" class="dropzone">
      <p id="upload-hint">Click or drop an image, video, or audio file here</p>
      <input id="file-input" type="file" hidden>
      <p id="upload-error" class="error hidden"></p>
    </section>
    <section id="detector-area"></section>
    <form id="supplementary-form">
      <input id="data-source" name="data_source" placeholder="Where is the sample from?">
      <select id="ground-truth" name="ground_truth">
        <option value="">Ground truth unknown</option>
        <option value="real">Known real</option>
        <option value="fake">Known fake</option>
      </select>
      <input id="background" name="background" placeholder="Anything else we should know?">
      <label>
        <input id="research-consent" type="checkbox" name="research_consent">
        I consent to this sample being used for research
      </label>
      <button id="submit-task" type="submit" disabled>Submit</button>
    </form>
    <p id="submit-status"></p>
  `;

  const area = root.querySelector("#upload-area") as HTMLElement;
  const input = root.querySelector("#file-input") as HTMLInputElement;
  const hint = root.querySelector("#upload-hint") as HTMLElement;
  const errorLine = root.querySelector("#upload-error") as HTMLElement;
  const detectorArea = root.querySelector("#detector-area") as HTMLElement;
  const form = root.querySelector("#supplementary-form") as HTMLFormElement;
  const submit = root.querySelector("#submit-task") as HTMLButtonElement;
  const status = root.querySelector("#submit-status") as HTMLElement;

  async function acceptFile(file: File): Promise<void> {
    const modality = modalityOf(file.name);
    if (modality === null) {
      errorLine.textContent = `Unsupported file type: ${file.name}`;
      errorLine.classList.remove("hidden");
      return;
    }
    errorLine.classList.add("hidden");
    state.file = file;
    state.modality = modality;
    hint.textContent = `${file.name} (${modality}) — drop or click to replace`;
    const detectors = await api.detectors(modality);
    renderDetectorList(detectorArea, detectors);
    submit.disabled = false;
  }

  area.addEventListener("click", () => input.click());
  input.addEventListener("change", () => {
    const file = input.files?.[0];
    if (file) void acceptFile(file);
  });
  area.addEventListener("dragover", (event) => event.preventDefault());
  area.addEventListener("drop", (event) => {
    event.preventDefault();
    const file = event.dataTransfer?.files?.[0];
    if (file) void acceptFile(file);
  });

  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    if (!state.file) return;
    const chosen = Array.from(
      detectorArea.querySelectorAll<HTMLInputElement>(".detector-checkbox:checked"),
    ).map((box) => box.value);
    if (chosen.length === 0) {
      status.textContent = "Pick at least one detector.";
      return;
    }
    state.uploadState = "Uploading";
    submit.disabled = true;
    try {
      const created = await api.submitTask({
        file: state.file,
        detectorIds: chosen,
        dataSource: (root.querySelector("#data-source") as HTMLInputElement).value || undefined,
        groundTruth: (root.querySelector("#ground-truth") as HTMLSelectElement).value || undefined,
        background: (root.querySelector("#background") as HTMLInputElement).value || undefined,
        researchConsent: (root.querySelector("#research-consent") as HTMLInputElement).checked,
      });
      state.uploadState = "Submitted";
      status.textContent = "Submitted.";
      window.location.hash = `#/tasks/${created.task_id}`;
    } catch (err) {
      state.uploadState = "Selecting";
      submit.disabled = false;
      status.textContent = err instanceof Error ? err.message : "Submission failed.";
    }
  });

  return state;
}
