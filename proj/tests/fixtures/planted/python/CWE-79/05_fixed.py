from flask import Flask, render_template, request

app = Flask(__name__)


@app.route("/profile/<username>")
def profile(username):
    bio = request.args.get("bio", "")
    return render_template("profile.html", username=username, bio=bio)
