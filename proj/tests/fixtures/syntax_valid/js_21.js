const user = { profile: { name: 'Ada' } };
const name = user?.profile?.name ?? 'anonymous';
const len = user.tags?.length ?? 0;
label: for (const x of [1, 2, 3]) {
  if (x === 2) continue label;
}
