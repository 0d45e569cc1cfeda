const mysql = require('mysql');
const db = mysql.createConnection({ host: 'localhost', user: 'app', database: 'shop' });

function getUser(id, cb) {
  db.query('SELECT * FROM users WHERE id = ?', [id], cb);
}
