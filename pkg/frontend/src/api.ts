// Thin typed client for the study service. The fetch function is
// injectable so tests can supply canned responses.

import type { ApiErrorBody, MoveResponse, SessionState } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface StudyClient {
  createSession(
    participant: string,
    condition: string,
    day: number,
  ): Promise<{ session_id: string; state: SessionState }>;
  getState(sessionId: string): Promise<SessionState>;
  submitMove(sessionId: string, move: string, confirm?: boolean): Promise<MoveResponse>;
  submitQuestionnaire(
    sessionId: string,
    likert: number,
  ): Promise<{ recorded: boolean; likert: number }>;
}

export class StudyApi implements StudyClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    const body = await response.json();
    if (!response.ok) {
      const err = body as ApiErrorBody;
      throw new ApiError(response.status, err.code ?? "unknown", err.message ?? "request failed");
    }
    return body as T;
  }

  createSession(participant: string, condition: string, day: number) {
    return this.request<{ session_id: string; state: SessionState }>("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ participant, condition, day }),
    });
  }

  getState(sessionId: string) {
    return this.request<SessionState>(`/sessions/${sessionId}`);
  }

  submitMove(sessionId: string, move: string, confirm = false) {
    return this.request<MoveResponse>(`/sessions/${sessionId}/moves`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ move, confirm }),
    });
  }

  submitQuestionnaire(sessionId: string, likert: number) {
    return this.request<{ recorded: boolean; likert: number }>(
      `/sessions/${sessionId}/questionnaire`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ likert }),
      },
    );
  }
}
