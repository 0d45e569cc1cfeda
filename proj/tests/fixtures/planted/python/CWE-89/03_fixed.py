import sqlite3


def find_products(db_path, category):
    conn = sqlite3.connect(db_path)
    query = "SELECT id, title FROM products WHERE category = ?"
    rows = conn.execute(query, (category,)).fetchall()
    conn.close()
    return rows
