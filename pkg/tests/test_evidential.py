import json
import math
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest
from scipy import integrate, stats

from tempora import allen
from tempora.compiler import parse_statement
from tempora.errors import InvalidAlpha
from tempora.evidential import (
    DirichletEvidence,
    EpistemicConfig,
    NoisyProvider,
    RemoteProvider,
    RuleBasedProvider,
    dirichlet_entropy,
    normalized_epistemic,
    vacuity,
)


def entropy_k2(a, b):
    pdf = stats.beta(a, b).pdf

    def f(x):
        p = pdf(x)
        return -p * math.log(p) if p > 0 else 0.0

    return integrate.quad(f, 0, 1, limit=200)[0]


def entropy_k3(alpha):
    dist = stats.dirichlet(alpha)

    def f(y, x):
        z = 1.0 - x - y
        if z <= 1e-12 or x <= 1e-12 or y <= 1e-12:
            return 0.0
        lp = dist.logpdf([x, y, z])
        return -math.exp(lp) * lp

    return integrate.dblquad(f, 0, 1, 0, lambda x: 1 - x, epsabs=1e-7, epsrel=1e-7)[0]


@pytest.mark.parametrize("a, b", [(1, 1), (2, 5), (0.8, 3.0), (10, 10), (3.5, 1.5)])
def test_entropy_k2_matches_integration(a, b):
    assert dirichlet_entropy((a, b)) == pytest.approx(entropy_k2(a, b), abs=1e-3)


@pytest.mark.parametrize("alpha", [(1, 1, 1), (2, 3, 4), (5, 1.5, 2), (8, 8, 8)])
def test_entropy_k3_matches_integration(alpha):
    assert dirichlet_entropy(alpha) == pytest.approx(entropy_k3(alpha), abs=1e-3)


def test_uniform_thirteen_simplex_entropy():
    # log of the simplex volume 1/12!
    assert dirichlet_entropy(DirichletEvidence.vacuous()) == pytest.approx(-math.lgamma(13), abs=1e-12)
    assert dirichlet_entropy(DirichletEvidence.vacuous()) == pytest.approx(-19.9872, abs=1e-4)


def test_entropy_decreases_with_concentration():
    values = [dirichlet_entropy((s,) * 13) for s in (1, 2, 5, 20)]
    assert values == sorted(values, reverse=True)


def test_vacuity():
    assert vacuity(DirichletEvidence.vacuous()) == 1.0
    assert vacuity(DirichletEvidence.concentrated(allen.mask("before"), 50)) == pytest.approx(13 / 62)


@pytest.mark.parametrize("alpha", [(1.0,), (1.0, 0.0), (1.0, -2.0), (1.0, float("inf")), (float("nan"), 1.0)])
def test_invalid_alpha(alpha):
    with pytest.raises(InvalidAlpha):
        DirichletEvidence(alpha)


def test_normalized_entropy_anchors():
    cfg = EpistemicConfig("normalized_entropy", s_max=100)
    assert normalized_epistemic(DirichletEvidence.vacuous(), cfg) == pytest.approx(1.0)
    assert normalized_epistemic(DirichletEvidence((100 / 13,) * 13), cfg) == pytest.approx(0.0, abs=1e-12)
    sharp = DirichletEvidence.concentrated(allen.mask("before"), 500)
    assert 0.0 <= normalized_epistemic(sharp, cfg) <= 1.0


def test_epistemic_config_validation():
    with pytest.raises(ValueError):
        EpistemicConfig("variance")
    with pytest.raises(ValueError):
        EpistemicConfig(s_max=5)


def test_fusion_adds_evidence():
    a = DirichletEvidence.concentrated(allen.mask("before"), 5)
    b = DirichletEvidence.concentrated(allen.mask("before"), 50)
    assert a.fuse(b).alpha[0] == 54.0
    assert a.fuse(DirichletEvidence.vacuous()) == a


def test_rule_based_reading():
    p = RuleBasedProvider()
    rel, alpha = p.propose(parse_statement("surgery before discharge"))
    assert rel == allen.mask("before")
    assert vacuity(alpha) == pytest.approx(13 / 62)
    _, hedged = p.propose(parse_statement("reportedly surgery before discharge"))
    assert vacuity(hedged) == pytest.approx(13 / 17)


def test_noisy_provider_is_seeded_and_flips_to_neighbours():
    st = [parse_statement(f"e{i} before f{i}", source=f"d:{i}") for i in range(200)]
    a = [NoisyProvider(seed=3).propose(s) for s in st]
    b = [NoisyProvider(seed=3).propose(s) for s in st]
    assert a == b
    flipped = [rel for rel, _ in a if rel != allen.mask("before")]
    assert 10 < len(flipped) < 60
    assert all(rel == allen.mask("meets") for rel in flipped)
    flipped_vac = [vacuity(al) for rel, al in a if rel != allen.mask("before")]
    clean_vac = [vacuity(al) for rel, al in a if rel == allen.mask("before")]
    assert min(flipped_vac) > max(clean_vac)


class _Handler(BaseHTTPRequestHandler):
    mode = "ok"

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        if self.mode == "error":
            self.send_response(500)
            self.end_headers()
            return
        if self.mode == "garbage":
            payload = b"not json"
        else:
            assert set(body) == {"sentence", "events"}
            payload = json.dumps({"relations": ["during"], "alpha": [2.0] * 13}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture
def server():
    httpd = HTTPServer(("127.0.0.1", 0), _Handler)
    t = threading.Thread(target=httpd.serve_forever, daemon=True)
    t.start()
    yield httpd
    httpd.shutdown()
    _Handler.mode = "ok"


def test_remote_provider_uses_response(server):
    p = RemoteProvider(f"http://127.0.0.1:{server.server_port}/", timeout_ms=2000)
    rel, alpha = p.propose(parse_statement("surgery before discharge"))
    assert rel == allen.mask("during")
    assert alpha.alpha == (2.0,) * 13


@pytest.mark.parametrize("mode", ["error", "garbage"])
def test_remote_provider_degrades_to_rules(server, mode, caplog):
    _Handler.mode = mode
    p = RemoteProvider(f"http://127.0.0.1:{server.server_port}/", timeout_ms=2000)
    st = parse_statement("surgery before discharge")
    assert p.propose(st) == RuleBasedProvider().propose(st)
    assert "remote extractor failed" in caplog.text


def test_remote_provider_unreachable():
    p = RemoteProvider("http://127.0.0.1:9/", timeout_ms=200)
    st = parse_statement("surgery before discharge")
    assert p.propose(st) == RuleBasedProvider().propose(st)
