const sqlite3 = require('sqlite3');
const db = new sqlite3.Database('app.db');

function deleteNote(noteId) {
  const sql = 'DELETE FROM notes WHERE id = ?';
  db.run(sql, [noteId]);
}
