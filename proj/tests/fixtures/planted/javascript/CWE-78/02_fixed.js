const express = require('express');
const childProcess = require('child_process');

const app = express();

app.get('/lookup', (req, res) => {
  const out = childProcess.execFileSync('nslookup', [String(req.query.domain)]);
  res.type('text/plain').send(out);
});
