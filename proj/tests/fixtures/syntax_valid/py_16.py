import sqlite3


def count_users(db):
    with sqlite3.connect(db) as conn:
        (n,) = conn.execute("SELECT COUNT(*) FROM users").fetchone()
    return n
