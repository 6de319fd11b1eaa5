// Payload shapes of the study service API.

export interface RationaleFactor {
  name: string;
  source: "utility" | "domain";
  sign: "positive" | "negative";
  payload: unknown;
}

export interface RationalePayload {
  move_san: string;
  lines: string[];
  factors: RationaleFactor[];
}

export interface GuidancePayload {
  highlight: [string, string] | null;
  variant: "rga" | "rga+" | null;
  rationale: RationalePayload | null;
}

export interface CurrentGame {
  game_index: number;
  phase: "diagnostic" | "instructional";
  fen: string;
  legal_moves: string[];
  player_moves: number;
  max_player_moves: number;
  guidance: GuidancePayload | null;
}

export interface GameSummary {
  game_index: number;
  phase: string;
  outcome: string | null;
  player_moves: number;
}

export interface SessionState {
  session_id: string;
  participant: string;
  condition: "None" | "Hints" | "RGA" | "RGA+";
  day: number;
  games_total: number;
  games_completed: number;
  session_complete: boolean;
  questionnaire_submitted: boolean;
  current: CurrentGame | null;
  games: GameSummary[];
}

export interface CautionPayload {
  move_san: string;
  lines: string[];
}

export interface MoveResponse {
  committed: boolean;
  game_index: number;
  move: string;
  san: string;
  percentile: number | null;
  caution: CautionPayload | null;
  move_number: number | null;
  opponent_move: string | null;
  opponent_san: string | null;
  outcome: string | null;
  game_over: boolean;
  fen_after: string | null;
  state: SessionState;
}

export interface ApiErrorBody {
  code: string;
  message: string;
}
