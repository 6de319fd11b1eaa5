// Interactive board: renders a FEN as an 8x8 grid, accepts moves by
// clicking a source square then a target square, with a promotion picker
// when the move list requires one. Only moves present in the server's
// legal-move list can be produced.

const GLYPHS: Record<string, string> = {
  P: "♙", N: "♘", B: "♗", R: "♖", Q: "♕", K: "♔",
  p: "♟", n: "♞", b: "♝", r: "♜", q: "♛", k: "♚",
};

const FILES = "abcdefgh";

export type MoveHandler = (move: string) => void;

export interface BoardOptions {
  legalMoves: string[];
  highlight: [string, string] | null;
  lastMove?: [string, string] | null;
  onMove?: MoveHandler;
}

export function piecePlacement(fen: string): Map<string, string> {
  const placement = fen.split(" ")[0];
  const pieces = new Map<string, string>();
  const ranks = placement.split("/");
  for (let i = 0; i < 8; i++) {
    const rank = 8 - i;
    let file = 0;
    for (const ch of ranks[i]) {
      if (ch >= "1" && ch <= "8") {
        file += Number(ch);
      } else {
        pieces.set(FILES[file] + rank, ch);
        file += 1;
      }
    }
  }
  return pieces;
}

interface Selection {
  from: string;
  targets: Map<string, string[]>; // target square -> full move texts
}

export class Board {
  private selection: Selection | null = null;
  private options: BoardOptions = { legalMoves: [], highlight: null };

  constructor(private container: HTMLElement) {}

  render(fen: string, options: BoardOptions): void {
    this.options = options;
    this.selection = null;
    const pieces = piecePlacement(fen);
    this.container.textContent = "";
    const grid = document.createElement("div");
    grid.className = "board";
    for (let rank = 8; rank >= 1; rank--) {
      for (let file = 0; file < 8; file++) {
        const name = FILES[file] + rank;
        const cell = document.createElement("div");
        cell.className = `square ${(file + rank) % 2 === 0 ? "dark" : "light"}`;
        cell.dataset.square = name;
        const piece = pieces.get(name);
        if (piece) {
          cell.textContent = GLYPHS[piece];
          cell.dataset.piece = piece;
        }
        if (options.highlight && options.highlight.includes(name)) {
          cell.classList.add("hint");
        }
        if (options.lastMove && options.lastMove.includes(name)) {
          cell.classList.add("last-move");
        }
        cell.addEventListener("click", () => this.onSquareClick(name));
        grid.appendChild(cell);
      }
    }
    this.container.appendChild(grid);
  }

  private sourceSquares(): Set<string> {
    return new Set(this.options.legalMoves.map((m) => m.slice(0, 2)));
  }

  private onSquareClick(square: string): void {
    if (!this.options.onMove) return;
    if (this.selection) {
      const moves = this.selection.targets.get(square);
      this.clearSelection();
      if (moves && moves.length === 1) {
        this.options.onMove(moves[0]);
        return;
      }
      if (moves && moves.length > 1) {
        this.showPromotionPicker(moves);
        return;
      }
      // fall through: maybe the click starts a new selection
    }
    if (this.sourceSquares().has(square)) {
      const targets = new Map<string, string[]>();
      for (const move of this.options.legalMoves) {
        if (move.slice(0, 2) !== square) continue;
        const to = move.slice(2, 4);
        targets.set(to, [...(targets.get(to) ?? []), move]);
      }
      this.selection = { from: square, targets };
      this.markSelection(square, targets);
    }
  }

  private markSelection(square: string, targets: Map<string, string[]>): void {
    for (const cell of this.container.querySelectorAll<HTMLElement>(".square")) {
      const name = cell.dataset.square ?? "";
      cell.classList.toggle("selected", name === square);
      cell.classList.toggle("target", targets.has(name));
    }
  }

  private clearSelection(): void {
    this.selection = null;
    for (const cell of this.container.querySelectorAll<HTMLElement>(".square")) {
      cell.classList.remove("selected", "target");
    }
    this.container.querySelector(".promotion-picker")?.remove();
  }

  private showPromotionPicker(moves: string[]): void {
    const picker = document.createElement("div");
    picker.className = "promotion-picker";
    const label = document.createElement("span");
    label.textContent = "Promote to:";
    picker.appendChild(label);
    for (const move of moves) {
      const piece = move.slice(4);
      const button = document.createElement("button");
      button.dataset.promotion = piece;
      button.textContent = { q: "Queen", r: "Rook", b: "Bishop", n: "Knight" }[piece] ?? piece;
      button.addEventListener("click", () => {
        picker.remove();
        this.options.onMove?.(move);
      });
      picker.appendChild(button);
    }
    this.container.appendChild(picker);
  }
}
