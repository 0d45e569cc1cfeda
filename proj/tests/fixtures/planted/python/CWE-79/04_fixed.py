from flask import Flask, make_response, request
from markupsafe import escape

app = Flask(__name__)


@app.route("/comment", methods=["POST"])
def comment():
    body = request.form["body"]
    resp = make_response("<li>%s</li>" % escape(body))
    resp.headers["Content-Type"] = "text/html"
    return resp
