// Canned API payloads and a scripted fake client for view tests.

import type { StudyClient } from "../src/api.js";
import type {
  GuidancePayload, MoveResponse, SessionState,
} from "../src/types.js";

export const MATE_IN_2_FEN = "7k/8/5K2/8/8/8/8/1Q6 w - - 0 1";
export const LEGAL_MOVES = [
  "b1a1", "b1a2", "b1b2", "b1b3", "b1b4", "b1b5", "b1b6", "b1b7", "b1b8",
  "b1c1", "b1c2", "b1d1", "b1d3", "b1e1", "b1e4", "b1f1", "b1f5", "b1g1",
  "b1g6", "b1h1", "f6e5", "f6e6", "f6e7", "f6f5", "f6f7", "f6g5", "f6g6",
];

export const RATIONALE_LINES = [
  "Qg6 leads to checkmate in 2 move(s).",
  "Qg6 keeps you ahead in material strength.",
];

export const CAUTION_LINES = [
  "Qa1 lets your opponent force checkmate in 3 move(s).",
  "Qa1 leaves a piece undefended where it can be captured.",
];

export function guidanceFor(condition: string): GuidancePayload | null {
  if (condition === "None") return null;
  if (condition === "Hints") {
    return { highlight: ["b1", "g6"], variant: null, rationale: null };
  }
  const variant = condition === "RGA+" ? "rga+" : "rga";
  return {
    highlight: ["b1", "g6"],
    variant,
    rationale: {
      move_san: "Qg6",
      lines: RATIONALE_LINES,
      factors: [
        {
          name: condition === "RGA+" ? "MateSoon" : "Material",
          source: condition === "RGA+" ? "domain" : "utility",
          sign: "positive",
          payload: null,
        },
        { name: "Material", source: "utility", sign: "positive", payload: null },
      ],
    },
  };
}

export function makeState(
  condition: "None" | "Hints" | "RGA" | "RGA+",
  overrides: Partial<SessionState> = {},
): SessionState {
  return {
    session_id: "sess-1",
    participant: "tester",
    condition,
    day: 1,
    games_total: 9,
    games_completed: 3,
    session_complete: false,
    questionnaire_submitted: false,
    current: {
      game_index: 3,
      phase: "instructional",
      fen: MATE_IN_2_FEN,
      legal_moves: LEGAL_MOVES,
      player_moves: 0,
      max_player_moves: 10,
      guidance: guidanceFor(condition),
    },
    games: [],
    ...overrides,
  };
}

export function completedState(questionnaireSubmitted: boolean): SessionState {
  return makeState("None", {
    session_complete: true,
    games_completed: 9,
    questionnaire_submitted: questionnaireSubmitted,
    current: null,
  });
}

export interface RecordedCall {
  method: string;
  args: unknown[];
}

export class FakeApi implements StudyClient {
  calls: RecordedCall[] = [];
  state: SessionState;
  cautionOnFirstSubmit: boolean;
  questionnaireError: Error | null = null;

  constructor(state: SessionState, cautionOnFirstSubmit = false) {
    this.state = state;
    this.cautionOnFirstSubmit = cautionOnFirstSubmit;
  }

  async createSession(participant: string, condition: string, day: number) {
    this.calls.push({ method: "createSession", args: [participant, condition, day] });
    return { session_id: this.state.session_id, state: this.state };
  }

  async getState(sessionId: string) {
    this.calls.push({ method: "getState", args: [sessionId] });
    return this.state;
  }

  async submitMove(sessionId: string, move: string, confirm = false): Promise<MoveResponse> {
    this.calls.push({ method: "submitMove", args: [sessionId, move, confirm] });
    if (this.cautionOnFirstSubmit && !confirm) {
      return {
        committed: false,
        game_index: 3,
        move,
        san: "Qa1",
        percentile: 6.25,
        caution: { move_san: "Qa1", lines: CAUTION_LINES },
        move_number: null,
        opponent_move: null,
        opponent_san: null,
        outcome: null,
        game_over: false,
        fen_after: null,
        state: this.state,
      };
    }
    const next: SessionState = {
      ...this.state,
      current: this.state.current
        ? { ...this.state.current, player_moves: this.state.current.player_moves + 1 }
        : null,
    };
    this.state = next;
    return {
      committed: true,
      game_index: 3,
      move,
      san: "Qa1",
      percentile: 6.25,
      caution: null,
      move_number: 1,
      opponent_move: "h8h7",
      opponent_san: "Kh7",
      outcome: null,
      game_over: false,
      fen_after: MATE_IN_2_FEN,
      state: next,
    };
  }

  async submitQuestionnaire(sessionId: string, likert: number) {
    this.calls.push({ method: "submitQuestionnaire", args: [sessionId, likert] });
    if (this.questionnaireError) throw this.questionnaireError;
    this.state = { ...this.state, questionnaire_submitted: true };
    return { recorded: true, likert };
  }

  submissions(): RecordedCall[] {
    return this.calls.filter((c) => c.method === "submitMove");
  }
}

export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
