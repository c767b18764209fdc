from iptk.config import Config, ProofStats, config, get_config


def test_config_reads_environment(monkeypatch):
    monkeypatch.setenv("IPTK_MAX_WORLDS", "3")
    monkeypatch.setenv("IPTK_CACHE", "/tmp/iptk-cache")
    monkeypatch.setenv("IPTK_LOG_LEVEL", "debug")
    cfg = Config.from_env()
    assert cfg.max_worlds == 3
    assert cfg.cache_enabled
    assert cfg.log_level == "DEBUG"


def test_defaults_keep_caches_in_memory(monkeypatch):
    monkeypatch.delenv("IPTK_CACHE", raising=False)
    assert not Config.from_env().cache_enabled
    monkeypatch.setattr(config, "cache_dir", "")
    assert get_config()["cache_dir"] == "(memory)"


def test_proof_stats():
    stats = ProofStats()
    stats.record_check(True, 5, 20, 1.5)
    stats.record_check(False, 3, 40, 0.5)
    stats.record_transform("plus", 90)
    out = stats.get_stats()
    assert out["checks"] == 2
    assert out["pass_rate"] == 0.5
    assert out["largest_proof"] == 90
    assert out["transforms"] == {"plus": 1}
    assert out["avg_check_ms"] == 1.0
    stats.reset()
    assert stats.get_stats()["checks"] == 0
