/**
 * Typed client for the platform's HTTP API. All page modules consume this
 * interface, so tests can substitute a fixture implementation.
 */

export interface DetectorInfo {
  id: string;
  name: string;
  year: number;
  organization: string;
  modality: string;
  scope: string;
  reference_url: string;
  repository_url: string;
  eta_seed_seconds: number;
}

export interface JobProgress {
  job_id: string;
  detector_id: string;
  state: string;
  percent: number;
  eta_seconds: number;
  score: number | null;
  error: string | null;
  result_link: string | null;
}

export interface ReportRow {
  detector_id: string;
  name: string;
  year: number;
  organization: string;
  scope: string;
  reference_url: string;
  repository_url: string;
  state: string;
  score: number | null;
  frame_scores: number[] | null;
  advanced: Record<string, unknown> | null;
  error: string | null;
}

export interface TaskReport {
  task_id: string;
  submitted_at: string;
  file: string;
  detectors: ReportRow[];
}

export interface HistoryEntry {
  task_id: string;
  submitted_at: string;
  file_preview: { original_name: string; modality: string; stored_path: string };
  result_link: string;
  status: string;
}

export interface HistoryPage {
  page: number;
  pages: number;
  total: number;
  entries: HistoryEntry[];
}

export interface SubmissionFields {
  file: File;
  detectorIds: string[];
  dataSource?: string;
  groundTruth?: string;
  background?: string;
  researchConsent: boolean;
}

/** The slice of the API the pages need. */
export interface PlatformApi {
  detectors(modality: string): Promise<DetectorInfo[]>;
  submitTask(fields: SubmissionFields): Promise<{ task_id: string; job_ids: string[] }>;
  progress(taskId: string): Promise<JobProgress[]>;
  report(taskId: string): Promise<TaskReport>;
  submissions(page: number): Promise<HistoryPage>;
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

export class HttpApi implements PlatformApi {
  constructor(
    private baseUrl: string,
    private getToken: () => string | null,
    private onUnauthorized: () => void,
  ) {}

  async login(identifier: string, password: string): Promise<string> {
    const res = await fetch(`${this.baseUrl}/api/login`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ identifier, password }),
    });
    const body = await res.json();
    if (!res.ok) throw new ApiError(res.status, body.detail ?? "login failed");
    return body.token as string;
  }

  detectors(modality: string): Promise<DetectorInfo[]> {
    return this.request(`/api/detectors?modality=${encodeURIComponent(modality)}`);
  }

  submitTask(fields: SubmissionFields): Promise<{ task_id: string; job_ids: string[] }> {
    const form = new FormData();
    form.append("file", fields.file);
    for (const id of fields.detectorIds) form.append("detector_ids", id);
    if (fields.dataSource) form.append("data_source", fields.dataSource);
    if (fields.groundTruth) form.append("ground_truth", fields.groundTruth);
    if (fields.background) form.append("background", fields.background);
    form.append("research_consent", String(fields.researchConsent));
    return this.request("/api/tasks", { method: "POST", body: form });
  }

  progress(taskId: string): Promise<JobProgress[]> {
    return this.request(`/api/tasks/${taskId}/progress`);
  }

  report(taskId: string): Promise<TaskReport> {
    return this.request(`/api/tasks/${taskId}/report`);
  }

  submissions(page: number): Promise<HistoryPage> {
    return this.request(`/api/me/submissions?page=${page}`);
  }

  private async request<T>(path: string, init: RequestInit = {}): Promise<T> {
    const headers = new Headers(init.headers);
    const token = this.getToken();
    if (token) headers.set("Authorization", `Bearer ${token}`);
    const res = await fetch(`${this.baseUrl}${path}`, { ...init, headers });
    if (res.status === 401) {
      this.onUnauthorized();
      throw new ApiError(401, "session expired");
    }
    if (!res.ok) {
      const body = await res.json().catch(() => ({}));
      throw new ApiError(res.status, body.detail ?? `request failed (${res.status})`);
    }
    return (await res.json()) as T;
  }
}
