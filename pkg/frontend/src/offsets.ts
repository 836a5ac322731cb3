// The service counts offsets in Unicode scalar values (one per code point);
// JS strings count UTF-16 code units. Selections must convert both ways or
// multibyte text shifts every span by the number of preceding astral chars.

export function scalarLength(text: string): number {
  let count = 0;
  for (const _ of text) count++;
  return count;
}

export function utf16ToScalar(text: string, utf16Offset: number): number {
  if (utf16Offset < 0 || utf16Offset > text.length) {
    throw new RangeError(`offset ${utf16Offset} out of range for length ${text.length}`);
  }
  let scalars = 0;
  let units = 0;
  for (const ch of text) {
    if (units === utf16Offset) return scalars;
    units += ch.length;
    scalars++;
    if (units > utf16Offset) {
      throw new RangeError(`offset ${utf16Offset} splits a surrogate pair`);
    }
  }
  return scalars;
}

export function scalarToUtf16(text: string, scalarOffset: number): number {
  if (scalarOffset < 0) {
    throw new RangeError(`scalar offset ${scalarOffset} is negative`);
  }
  let scalars = 0;
  let units = 0;
  for (const ch of text) {
    if (scalars === scalarOffset) return units;
    units += ch.length;
    scalars++;
  }
  if (scalars === scalarOffset) return units;
  throw new RangeError(`scalar offset ${scalarOffset} beyond end (${scalars} scalars)`);
}
