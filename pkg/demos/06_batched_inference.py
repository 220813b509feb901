"""Run a prompting paradigm against a completion backend, with caching.

A tiny in-process HTTP stub stands in for a served model so the demo is
self-contained: the first pass hits the "network", the rerun is answered
entirely from the response cache.
"""

import json
import tempfile
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from dscre import (
    BackendConfig,
    BuildConfig,
    Entity,
    PromptSpec,
    REInstance,
    RelationSet,
    Sentence,
    build_prompt,
    run_batch,
)

instances = [
    REInstance(
        id="demo-1",
        sentence=Sentence("双汇国际在报告中深入分析了双汇的盈利前景"),
        head=Entity("双汇国际"),
        tail=Entity("双汇"),
        gold_relations=("分析",),
    ),
    REInstance(
        id="demo-2",
        sentence=Sentence("腾讯宣布战略投资京东并达成深度合作"),
        head=Entity("腾讯"),
        tail=Entity("京东"),
        gold_relations=("投资", "合作"),
    ),
]

relation_set = RelationSet(labels=("NA", "分析", "投资", "合作", "拥有"), na_label="NA")
served_requests = 0


class Handler(BaseHTTPRequestHandler):
    def do_POST(self):
        global served_requests
        served_requests += 1
        payload = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        prompt = payload["messages"][-1]["content"]
        # answer the query triplet with a fixed relation
        head, tail = prompt.split("([")[-1].split("], ?, [")
        tail = tail.split("])")[0]
        answer = f"([{head}], 分析, [{tail}])"
        body = json.dumps({"choices": [{"message": {"content": answer}}]}, ensure_ascii=False)
        raw = body.encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Length", str(len(raw)))
        self.end_headers()
        self.wfile.write(raw)

    def log_message(self, *args):
        pass


server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
threading.Thread(target=server.serve_forever, daemon=True).start()
url = f"http://127.0.0.1:{server.server_address[1]}"

spec = PromptSpec(paradigm="finetuned", build_config=BuildConfig())
print("== the three paradigms build different prompts ==")
print("finetuned prompt:")
print("  " + build_prompt(instances[0], spec).replace("\n", "\n  "))
classify = PromptSpec(paradigm="classify_then_extract", relation_set=relation_set)
options = build_prompt(instances[0], classify).split("Options:\n")[1]
print(f"classify_then_extract appends {len(options.splitlines())} option lines")

with tempfile.TemporaryDirectory() as cache_dir:
    backend = BackendConfig(base_url=url, model_name="demo-model", parallelism=2)
    records = run_batch(instances, spec, backend, cache_dir)
    print(f"\nfirst pass: {served_requests} backend request(s)")
    for record in records:
        print(f"  {record.instance_id}: {record.raw_answer}")
    run_batch(instances, spec, backend, cache_dir)
    print(f"warm rerun: still {served_requests} request(s) (all cache hits)")
    print("cache entries:", sorted(p.name[:12] for p in Path(cache_dir).iterdir()))

server.shutdown()
