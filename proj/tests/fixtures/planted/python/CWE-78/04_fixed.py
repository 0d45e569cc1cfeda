import subprocess
from flask import Flask, request

app = Flask(__name__)


@app.route("/convert")
def convert():
    src = request.args.get("src")
    dst = request.args.get("dst")
    proc = subprocess.Popen(["convert", src, dst])
    proc.wait()
    return "done"
