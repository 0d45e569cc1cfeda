function describe(value) {
  switch (typeof value) {
    case 'number':
      return `number ${value.toFixed(2)}`;
    case 'string':
      return `string of length ${value.length}`;
    default:
      return 'unknown';
  }
}
