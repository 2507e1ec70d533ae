// Word tokenization with character offsets, then sub-word pieces. The piece
// length cap deliberately splits longer words so that multi-sub-token
// targets (and their averaging) are exercised even with the offline
// encoder; models bring their own tokenizers through the Encoder interface.

export interface Piece {
  text: string;
  start: number; // character offset into the context, inclusive
  end: number; // exclusive
  wordIndex: number;
}

const WORD_RE = /[\p{L}\p{N}_']+|[^\s\p{L}\p{N}_']/gu;

export const DEFAULT_PIECE_LEN = 4;

export function tokenize(context: string, pieceLen = DEFAULT_PIECE_LEN): Piece[] {
  const pieces: Piece[] = [];
  let wordIndex = 0;
  for (const match of context.matchAll(WORD_RE)) {
    const word = match[0];
    const base = match.index ?? 0;
    for (let offset = 0; offset < word.length; offset += pieceLen) {
      const text = word.slice(offset, offset + pieceLen);
      pieces.push({
        text: offset === 0 ? text : `##${text}`,
        start: base + offset,
        end: base + offset + text.length,
        wordIndex,
      });
    }
    wordIndex++;
  }
  return pieces;
}

/** Indices of the pieces whose character range overlaps [start, end). */
export function alignSpan(pieces: Piece[], start: number, end: number): number[] {
  const hits: number[] = [];
  pieces.forEach((piece, i) => {
    if (piece.start < end && piece.end > start) {
      hits.push(i);
    }
  });
  return hits;
}

export type WindowPolicy = "center" | "tail";

/**
 * Choose the [start, end) piece window of at most maxLength pieces.
 * "tail" truncates the end of the sequence; "center" centers the window on
 * the target pieces so they always survive (as long as they fit at all).
 */
export function selectWindow(
  nPieces: number,
  targetPieces: number[],
  maxLength: number,
  policy: WindowPolicy,
): [number, number] {
  if (nPieces <= maxLength) {
    return [0, nPieces];
  }
  if (policy === "tail") {
    return [0, maxLength];
  }
  const mid = Math.floor(
    (targetPieces[0] + targetPieces[targetPieces.length - 1]) / 2,
  );
  let start = mid - Math.floor(maxLength / 2);
  start = Math.max(0, Math.min(start, nPieces - maxLength));
  return [start, start + maxLength];
}
