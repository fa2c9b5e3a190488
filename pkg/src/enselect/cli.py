"""Command-line client for the experiment service.

Subcommands load a JSON config, send it to the HTTP API, and write the
returned artifacts into --out. By default the service runs in-process
over an ASGI transport (no network, no separate server); pass --server
to target a running instance instead. Dataset files referenced by
``dataset.path`` are read client-side (relative to the config file) and
inlined, so both modes see identical requests.

Exit codes: 0 success, 1 transport failure, 2 config error, 3 data error,
4 resource limit.
"""

from __future__ import annotations

import asyncio
import json
import sys
from pathlib import Path

import click
import httpx

from . import __version__

_EXIT_CODES = {"config": 2, "data": 3, "resource": 4}
_STATUS_KINDS = {400: "data", 413: "resource", 422: "config"}


def _fail(kind: str, message: str):
    click.echo(f"error ({kind}): {message}", err=True)
    sys.exit(_EXIT_CODES.get(kind, 1))


def _load_config(path: str) -> dict:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        _fail("config", f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        _fail("config", f"config is not valid JSON: {exc}")
    if not isinstance(payload, dict):
        _fail("config", "config root must be a JSON object")
    return payload


def _inline_dataset_path(payload: dict, config_path: str):
    """Replace dataset.path with the file's contents, client-side."""
    dataset = payload.get("dataset")
    if not isinstance(dataset, dict) or "path" not in dataset:
        return
    raw = Path(dataset["path"])
    resolved = raw if raw.is_absolute() else Path(config_path).parent / raw
    try:
        text = resolved.read_text(encoding="utf-8")
    except FileNotFoundError:
        _fail("data", f"dataset file not found: {resolved}")
    del dataset["path"]
    dataset["csv"] = text


def _post(server: str | None, endpoint: str, payload: dict) -> httpx.Response:
    if server:
        try:
            return httpx.post(server.rstrip("/") + endpoint, json=payload, timeout=None)
        except httpx.HTTPError as exc:
            _fail("transport", f"request to {server} failed: {exc}")

    from .service import create_app

    async def _run():
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://enselect.local", timeout=None
        ) as client:
            return await client.post(endpoint, json=payload)

    return asyncio.run(_run())


def _write_artifacts(response: httpx.Response, out_dir: str):
    if response.status_code != 200:
        kind = _STATUS_KINDS.get(response.status_code, "transport")
        try:
            body = response.json()
            message = body.get("message") or json.dumps(body.get("detail"))
        except ValueError:
            message = response.text
        _fail(kind, message)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for artifact in response.json()["artifacts"]:
        target = out / artifact["name"]
        target.write_text(artifact["content"], encoding="utf-8", newline="")
        click.echo(f"wrote {target}")


def _run_command(endpoint: str, config: str, out: str, seed: int | None, server: str | None):
    payload = _load_config(config)
    if seed is not None:
        payload["seed"] = seed
    _inline_dataset_path(payload, config)
    response = _post(server, endpoint, payload)
    _write_artifacts(response, out)


def _common_options(fn):
    fn = click.option("--config", required=True, help="JSON config file")(fn)
    fn = click.option("--out", required=True, help="output directory for artifacts")(fn)
    fn = click.option("--seed", type=int, default=None, help="override the config seed")(fn)
    fn = click.option("--server", default=None, help="remote service URL (in-process if omitted)")(fn)
    return fn


@click.group()
@click.version_option(version=__version__)
def main():
    """Budgeted ensemble selection experiments for correlated classifiers."""


@main.command()
@_common_options
def curve(config, out, seed, server):
    """Run an error-vs-budget experiment over methods, aggregators and splits."""
    _run_command("/experiments/curve", config, out, seed, server)


@main.command("validate-copula")
@_common_options
def validate_copula(config, out, seed, server):
    """Fit a copula to a dataset and emit empirical-vs-model diagnostics."""
    _run_command("/copula/validate", config, out, seed, server)


@main.command()
@_common_options
def saturate(config, out, seed, server):
    """Sweep pool sizes of an equicorrelated ensemble against the error floor."""
    _run_command("/saturation", config, out, seed, server)


@main.command("fit-copula")
@_common_options
def fit_copula(config, out, seed, server):
    """Fit and serialize a copula model from a prediction matrix."""
    _run_command("/copula/fit", config, out, seed, server)


@main.command()
@_common_options
def sample(config, out, seed, server):
    """Draw a synthetic dataset from a copula model or equicorrelated spec."""
    _run_command("/copula/sample", config, out, seed, server)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("enselect.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
