// Controller: one logical client per session, state refreshed after every
// server response. Moves go through the two-phase flow: submit without
// confirm, surface any caution, and resubmit with confirm only when the
// player insists.

import { ApiError, StudyApi } from "./api.js";
import type { StudyClient } from "./api.js";
import type { PendingCaution } from "./view.js";
import { StudyView } from "./view.js";
import type { SessionState } from "./types.js";

export class StudyController {
  private view: StudyView;
  private state: SessionState | null = null;
  private pendingCaution: PendingCaution | null = null;
  private lastMove: [string, string] | null = null;
  private busy = false;

  constructor(
    private api: StudyClient,
    root: HTMLElement,
  ) {
    this.view = new StudyView(root, {
      onMove: (move) => void this.propose(move),
      onPlayAnyway: (move) => void this.confirmMove(move),
      onChooseAgain: () => this.dismissCaution(),
      onQuestionnaire: (likert) => void this.submitQuestionnaire(likert),
    });
  }

  async start(participant: string, condition: string, day: number): Promise<void> {
    const created = await this.api.createSession(participant, condition, day);
    this.state = created.state;
    this.redraw();
  }

  get sessionId(): string {
    if (!this.state) throw new Error("no active session");
    return this.state.session_id;
  }

  private redraw(notice: string | null = null): void {
    if (this.state) {
      this.view.render(this.state, this.pendingCaution, this.lastMove, notice);
    }
  }

  private async propose(move: string): Promise<void> {
    if (this.busy || this.pendingCaution) return;
    this.busy = true;
    try {
      const response = await this.api.submitMove(this.sessionId, move, false);
      if (!response.committed && response.caution) {
        this.pendingCaution = { move, caution: response.caution };
        this.state = response.state;
      } else {
        this.applyCommit(response.move, response.opponent_move, response.state);
      }
      this.redraw();
    } catch (err) {
      this.redraw(err instanceof ApiError ? err.message : String(err));
    } finally {
      this.busy = false;
    }
  }

  private async confirmMove(move: string): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    try {
      const response = await this.api.submitMove(this.sessionId, move, true);
      this.pendingCaution = null;
      this.applyCommit(response.move, response.opponent_move, response.state);
      this.redraw();
    } catch (err) {
      this.redraw(err instanceof ApiError ? err.message : String(err));
    } finally {
      this.busy = false;
    }
  }

  private applyCommit(move: string, opponentMove: string | null, state: SessionState): void {
    const shown = opponentMove ?? move;
    this.lastMove = [shown.slice(0, 2), shown.slice(2, 4)];
    this.state = state;
  }

  private dismissCaution(): void {
    this.pendingCaution = null;
    this.redraw();
  }

  private async submitQuestionnaire(likert: number): Promise<void> {
    try {
      await this.api.submitQuestionnaire(this.sessionId, likert);
      this.state = await this.api.getState(this.sessionId);
      this.redraw();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.state = await this.api.getState(this.sessionId);
        this.redraw(err.message);
      } else {
        this.redraw(err instanceof ApiError ? err.message : String(err));
      }
    }
  }
}

export function bootstrap(root: HTMLElement, api: StudyClient = new StudyApi()): void {
  const form = document.createElement("form");
  form.className = "setup";
  form.innerHTML = `
    <label>Participant <input name="participant" required value="guest"></label>
    <label>Condition
      <select name="condition">
        <option>None</option><option>Hints</option>
        <option>RGA</option><option selected>RGA+</option>
      </select>
    </label>
    <label>Day
      <select name="day"><option>1</option><option>2</option><option>3</option></select>
    </label>
    <button type="submit">Start session</button>
  `;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(form);
    form.remove();
    const controller = new StudyController(api, root);
    void controller.start(
      String(data.get("participant")),
      String(data.get("condition")),
      Number(data.get("day")),
    );
  });
  root.appendChild(form);
}
