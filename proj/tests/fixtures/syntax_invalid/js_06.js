const t = `open
