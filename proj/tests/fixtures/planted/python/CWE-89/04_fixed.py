import sqlite3

from flask import Flask, request

app = Flask(__name__)


@app.route("/orders")
def orders():
    status = request.args.get("status")
    db = sqlite3.connect("shop.db")
    sql = "SELECT * FROM orders WHERE status = ?"
    return {"rows": db.execute(sql, (status,)).fetchall()}
