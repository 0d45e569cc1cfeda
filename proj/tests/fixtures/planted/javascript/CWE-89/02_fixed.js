const express = require('express');
const { Pool } = require('pg');

const pool = new Pool();
const app = express();

app.get('/orders', async (req, res) => {
  const result = await pool.query('SELECT * FROM orders WHERE customer = $1', [req.query.customer]);
  res.json(result.rows);
});
