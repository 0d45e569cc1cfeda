def walrus_demo(data):
    if (n := len(data)) > 10:
        return f"too long ({n} elements, expected <= 10)"
    return None
