import {
  DetectorInfo,
  HistoryPage,
  JobProgress,
  PlatformApi,
  SubmissionFields,
  TaskReport,
} from "../src/api";

export const DETECTORS: DetectorInfo[] = [
  {
    id: "img-alpha", name: "Alpha", year: 2022, organization: "Lab A",
    modality: "image", scope: "GAN images",
    reference_url: "https://example.org/alpha-paper",
    repository_url: "https://example.org/alpha-code", eta_seed_seconds: 30,
  },
  {
    id: "vid-beta", name: "Beta", year: 2021, organization: "Lab B",
    modality: "video", scope: "Face swaps",
    reference_url: "https://example.org/beta-paper",
    repository_url: "https://example.org/beta-code", eta_seed_seconds: 90,
  },
  {
    id: "vid-gamma", name: "Gamma", year: 2023, organization: "Lab C",
    modality: "video", scope: "Lip sync",
    reference_url: "https://example.org/gamma-paper",
    repository_url: "https://example.org/gamma-code", eta_seed_seconds: 90,
  },
  {
    id: "aud-delta", name: "Delta", year: 2023, organization: "Lab D",
    modality: "audio", scope: "Vocoder artifacts",
    reference_url: "https://example.org/delta-paper",
    repository_url: "https://example.org/delta-code", eta_seed_seconds: 30,
  },
];

export const PROGRESS: JobProgress[] = [
  {
    job_id: "job-1", detector_id: "vid-beta", state: "running", percent: 50,
    eta_seconds: 45, score: null, error: null, result_link: null,
  },
  {
    job_id: "job-2", detector_id: "vid-gamma", state: "completed", percent: 100,
    eta_seconds: 0, score: 0.86, error: null, result_link: "/api/tasks/t-1/report",
  },
  {
    job_id: "job-3", detector_id: "img-alpha", state: "failed", percent: 100,
    eta_seconds: 0, score: null, error: "detector exited with status 3",
    result_link: null,
  },
];

export const HISTORY: HistoryPage = {
  page: 1,
  pages: 2,
  total: 22,
  entries: [
    {
      task_id: "t-1", submitted_at: "2024-03-01T12:00:00+00:00",
      file_preview: {
        original_name: "portrait.png", modality: "image",
        stored_path: "/uploads/u/t-1/portrait.png",
      },
      result_link: "/api/tasks/t-1/report", status: "Completed",
    },
    {
      task_id: "t-2", submitted_at: "2024-03-01T13:30:00+00:00",
      file_preview: {
        original_name: "clip.mp4", modality: "video",
        stored_path: "/uploads/u/t-2/clip.mp4",
      },
      result_link: "/api/tasks/t-2/report", status: "In-Progress",
    },
  ],
};

export const REPORT: TaskReport = {
  task_id: "t-1",
  submitted_at: "2024-03-01T12:00:00+00:00",
  file: "clip.mp4",
  detectors: [
    {
      detector_id: "vid-gamma", name: "Gamma", year: 2023, organization: "Lab C",
      scope: "Lip sync", reference_url: "https://example.org/gamma-paper",
      repository_url: "https://example.org/gamma-code", state: "completed",
      score: 0.86, frame_scores: [0.1, 0.9, 0.5, 0.7],
      advanced: { heatmap: "none" }, error: null,
    },
  ],
};

/** In-memory API double; records calls so tests can assert against them. */
export class FixtureApi implements PlatformApi {
  detectorCalls: string[] = [];
  progressCalls = 0;
  progressQueue: JobProgress[][] = [];
  submitted: SubmissionFields[] = [];

  async detectors(modality: string): Promise<DetectorInfo[]> {
    this.detectorCalls.push(modality);
    return DETECTORS.filter((d) => d.modality === modality);
  }

  async submitTask(fields: SubmissionFields) {
    this.submitted.push(fields);
    return { task_id: "t-new", job_ids: fields.detectorIds.map((id) => `job-${id}`) };
  }

  async progress(): Promise<JobProgress[]> {
    this.progressCalls += 1;
    if (this.progressQueue.length > 1) return this.progressQueue.shift()!;
    return this.progressQueue[0] ?? PROGRESS;
  }

  async report(): Promise<TaskReport> {
    return REPORT;
  }

  async submissions(): Promise<HistoryPage> {
    return HISTORY;
  }
}

export function flush(times = 5): Promise<void> {
  let chain = Promise.resolve();
  for (let i = 0; i < times; i += 1) chain = chain.then(() => undefined);
  return chain;
}
