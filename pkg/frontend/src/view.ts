// View layer: board plus the condition-gated side panels. Rationale and
// caution text is inserted exactly as the API delivered it; this module
// never rewords server strings.

import { Board } from "./board.js";
import type { CautionPayload, SessionState } from "./types.js";

export interface ViewHandlers {
  onMove: (move: string) => void;
  onPlayAnyway: (move: string) => void;
  onChooseAgain: () => void;
  onQuestionnaire: (likert: number) => void;
}

export interface PendingCaution {
  move: string;
  caution: CautionPayload;
}

export class StudyView {
  private board: Board;
  private boardHost: HTMLElement;
  private side: HTMLElement;

  constructor(
    private root: HTMLElement,
    private handlers: ViewHandlers,
  ) {
    this.root.textContent = "";
    this.boardHost = document.createElement("div");
    this.boardHost.className = "board-host";
    this.side = document.createElement("div");
    this.side.className = "side-panel";
    this.root.appendChild(this.boardHost);
    this.root.appendChild(this.side);
    this.board = new Board(this.boardHost);
  }

  render(
    state: SessionState,
    pendingCaution: PendingCaution | null = null,
    lastMove: [string, string] | null = null,
    notice: string | null = null,
  ): void {
    this.side.textContent = "";
    this.renderProgress(state);
    if (state.current) {
      const guidance = state.current.guidance;
      this.board.render(state.current.fen, {
        legalMoves: pendingCaution ? [] : state.current.legal_moves,
        highlight: guidance?.highlight ?? null,
        lastMove,
        onMove: this.handlers.onMove,
      });
      if (guidance?.rationale) {
        this.renderRationale(guidance.rationale.lines, guidance.variant);
      }
      if (pendingCaution) {
        this.renderCautionDialog(pendingCaution);
      }
    } else {
      this.boardHost.textContent = "";
      this.renderSessionEnd(state);
    }
    if (notice) {
      const el = document.createElement("p");
      el.className = "notice";
      el.textContent = notice;
      this.side.appendChild(el);
    }
  }

  private renderProgress(state: SessionState): void {
    const progress = document.createElement("p");
    progress.className = "progress";
    if (state.current) {
      progress.textContent =
        `Day ${state.day} - game ${state.current.game_index + 1} of ${state.games_total}` +
        ` (${state.current.phase}) - move ${state.current.player_moves + 1}` +
        ` of ${state.current.max_player_moves}`;
    } else {
      progress.textContent = `Day ${state.day} - all ${state.games_total} games finished`;
    }
    this.side.appendChild(progress);
  }

  private renderRationale(lines: string[], variant: "rga" | "rga+" | null): void {
    const panel = document.createElement("div");
    panel.className = `rationale-panel ${variant === "rga+" ? "rga-plus" : "rga"}`;
    const heading = document.createElement("h3");
    heading.textContent = "Why this move?";
    panel.appendChild(heading);
    const list = document.createElement("ul");
    for (const line of lines) {
      const item = document.createElement("li");
      item.className = "rationale-line";
      item.textContent = line;
      list.appendChild(item);
    }
    panel.appendChild(list);
    this.side.appendChild(panel);
  }

  private renderCautionDialog(pending: PendingCaution): void {
    const dialog = document.createElement("div");
    dialog.className = "caution-dialog";
    const heading = document.createElement("h3");
    heading.textContent = "Are you sure?";
    dialog.appendChild(heading);
    const list = document.createElement("ul");
    for (const line of pending.caution.lines) {
      const item = document.createElement("li");
      item.className = "caution-line";
      item.textContent = line;
      list.appendChild(item);
    }
    dialog.appendChild(list);
    const anyway = document.createElement("button");
    anyway.className = "play-anyway";
    anyway.textContent = "Play anyway";
    anyway.addEventListener("click", () => this.handlers.onPlayAnyway(pending.move));
    const again = document.createElement("button");
    again.className = "choose-again";
    again.textContent = "Choose again";
    again.addEventListener("click", () => this.handlers.onChooseAgain());
    dialog.appendChild(anyway);
    dialog.appendChild(again);
    this.side.appendChild(dialog);
  }

  private renderSessionEnd(state: SessionState): void {
    if (!state.questionnaire_submitted) {
      const form = document.createElement("div");
      form.className = "questionnaire";
      const question = document.createElement("p");
      question.textContent = "Do you believe your performance improved this session?";
      form.appendChild(question);
      const scale = document.createElement("div");
      scale.className = "likert";
      const labels = ["Strongly disagree", "Disagree", "Neutral", "Agree", "Strongly agree"];
      labels.forEach((label, i) => {
        const button = document.createElement("button");
        button.dataset.likert = String(i + 1);
        button.textContent = `${i + 1} - ${label}`;
        button.addEventListener("click", () => this.handlers.onQuestionnaire(i + 1));
        scale.appendChild(button);
      });
      form.appendChild(scale);
      this.side.appendChild(form);
    } else {
      const done = document.createElement("p");
      done.className = "completion";
      done.textContent = "Session complete. Thank you for playing!";
      this.side.appendChild(done);
    }
  }
}
