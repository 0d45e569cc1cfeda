const EventEmitter = require('events');

class Job extends EventEmitter {
  run() {
    this.emit('start');
    setImmediate(() => this.emit('done', { ok: true }));
  }
}

new Job().on('done', (r) => console.log(r.ok)).run();
