/** Typed client for the listening-test service API. */

export interface TrialPayload {
  done: boolean;
  session_id: string;
  trial_id?: string;
  axis?: string;
  instruction?: string;
  /** Opaque stimulus handles, already in this evaluator's presentation order. */
  stimuli?: string[];
  completed: number;
  total: number;
}

export interface RatingAck {
  status: string;
  replaced: boolean;
}

export interface RatingBody {
  session_id: string;
  evaluator_id: string;
  trial_id: string;
  scores: Record<string, number>;
}

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

export interface Service {
  nextTrial(sessionId: string, evaluatorId: string): Promise<TrialPayload>;
  stimulusUrl(handle: string): string;
  submitRating(body: RatingBody): Promise<RatingAck>;
}

async function errorDetail(response: Response): Promise<string> {
  try {
    const body = await response.json();
    if (body && typeof body.detail === "string") return body.detail;
  } catch {
    // fall through to the generic message
  }
  return `request failed with status ${response.status}`;
}

export class ServiceClient implements Service {
  constructor(private readonly baseUrl: string = "") {}

  async nextTrial(sessionId: string, evaluatorId: string): Promise<TrialPayload> {
    const url =
      `${this.baseUrl}/api/session/${encodeURIComponent(sessionId)}` +
      `/next-trial?evaluator=${encodeURIComponent(evaluatorId)}`;
    const response = await fetch(url);
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return (await response.json()) as TrialPayload;
  }

  stimulusUrl(handle: string): string {
    return `${this.baseUrl}/api/stimulus/${encodeURIComponent(handle)}`;
  }

  async submitRating(body: RatingBody): Promise<RatingAck> {
    const response = await fetch(`${this.baseUrl}/api/rating`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return (await response.json()) as RatingAck;
  }
}
