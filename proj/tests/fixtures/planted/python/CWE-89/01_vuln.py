import sqlite3


def get_user(conn: sqlite3.Connection, username):
    cur = conn.cursor()
    cur.execute("SELECT * FROM users WHERE name = '" + username + "'")
    return cur.fetchone()
