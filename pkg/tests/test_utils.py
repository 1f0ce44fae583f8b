from core.utils import derive_seed, digest_file, make_rng, ordered_map, worker_count


def test_ordered_map_keeps_input_order():
    items = list(range(20))
    assert ordered_map(lambda x: x * x, items, workers=4) == [x * x for x in items]
    assert ordered_map(str, [], workers=4) == []


def test_worker_count_from_environment(monkeypatch):
    monkeypatch.setenv('SHEAFCTL_WORKERS', '3')
    assert worker_count() == 3
    monkeypatch.setenv('SHEAFCTL_WORKERS', 'many')
    assert worker_count() == 1
    monkeypatch.delenv('SHEAFCTL_WORKERS')
    assert worker_count() == 1


def test_seeds_and_digests(tmp_path):
    assert derive_seed(7, 'a', 1) == derive_seed(7, 'a', 1)
    assert derive_seed(7, 'a', 1) != derive_seed(7, 'a', 2)
    assert make_rng(3).random() == make_rng(3).random()
    path = tmp_path / 'x.poset'
    path.write_bytes(b'')
    assert digest_file(str(path)) == 'e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855'
