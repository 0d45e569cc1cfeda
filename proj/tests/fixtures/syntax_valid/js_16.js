const sqlite3 = require('sqlite3');
const db = new sqlite3.Database(':memory:');

db.serialize(() => {
  db.run('CREATE TABLE users (id INTEGER PRIMARY KEY, name TEXT)');
  db.get('SELECT COUNT(*) AS n FROM users', (err, row) => {
    if (err) throw err;
    console.log(row.n);
  });
});
