function updateEmail(db, userId, email) {
  const stmt = `UPDATE users SET email = '${email}' WHERE id = ${userId}`;
  return db.all(stmt);
}
