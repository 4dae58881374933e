# Copyright 2026 The jrtok Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import numpy as np
import pytest

import jrtok


def tiny_config(steps=6):
    c = jrtok.TrainConfig()
    c.codebook_size = 8
    c.latent_dim = 8
    c.hidden = 16
    c.window = 16
    c.batch_size = 4
    c.total_steps = steps
    c.seed = 7
    c.corpus_sequences = 4
    c.corpus_duration = 1.0
    return c


@pytest.fixture(scope="module")
def trained():
    cfg = tiny_config()
    motion = jrtok.train_motion(cfg)
    imu = jrtok.train_imu(cfg, motion)
    base = jrtok.train_baseline(cfg)
    return cfg, motion, imu, base


def test_rot6d_round_trip():
    rng = np.random.default_rng(0)
    for _ in range(20):
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        if np.linalg.det(q) < 0:
            q[:, 0] *= -1
        back = jrtok.rot6d_to_matrix(jrtok.matrix_to_rot6d(q))
        assert np.abs(back - q).max() < 1e-12


def test_angular_velocity_about_z():
    c, s = np.cos(0.01), np.sin(0.01)
    rz = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    w = jrtok.angular_velocity(np.eye(3), rz, 0.01)
    assert np.allclose(w, [0.0, 0.0, 1.0], atol=1e-8)


def test_synthetic_shapes():
    m = jrtok.synthetic_motion(3, duration=1.0, style="squat")
    i = jrtok.synthetic_imu(3, duration=1.0, style="squat")
    assert m.shape == (60, jrtok.MOTION_WIDTH)
    assert i.shape == (60, jrtok.IMU_WIDTH)
    assert jrtok.joint_positions(m).shape == (60, 22, 3)
    clean = jrtok.synthetic_imu(3, duration=1.0, style="squat", drift=False)
    assert not np.array_equal(clean, i)


def test_corruption_touches_only_listed_sensor():
    i = jrtok.synthetic_imu(4, duration=1.0)
    noisy = jrtok.corrupt_imu(i, [2], seed=1)
    assert noisy.shape == i.shape
    assert not np.array_equal(noisy, i)


def test_quantize_matches_brute_force():
    rng = np.random.default_rng(1)
    z = rng.normal(size=(50, 4))
    cb = rng.normal(size=(9, 4))
    d = ((z[:, None, :] - cb[None, :, :]) ** 2).sum(-1)
    assert jrtok.quantize(z, cb) == list(d.argmin(1))


def test_zipf_and_js():
    p = jrtok.zipf_target(64)
    assert abs(sum(p) - 1.0) < 1e-12
    assert jrtok.js_divergence(p, p) == 0.0
    assert 0.0 < jrtok.js_divergence(p, list(reversed(p))) <= np.log(2)


def test_jitter_cubic():
    t = np.arange(60) / 60.0
    pos = np.zeros((60, 22, 3))
    pos[:, :, 0] = (t**3 / 6.0)[:, None]
    assert jrtok.jitter(pos) == pytest.approx(0.01, rel=1e-6)
    assert jrtok.mpjpe(pos, pos) == 0.0


def test_config_text_round_trip():
    cfg = tiny_config()
    back = jrtok.TrainConfig.parse(cfg.to_text())
    assert back.to_text() == cfg.to_text()
    with pytest.raises(jrtok.JrtokError, match="ConfigInvalid"):
        jrtok.TrainConfig.parse("no_such_key = 1")


def test_training_logs_and_checkpoints(trained, tmp_path):
    cfg, motion, imu, base = trained
    steps = []
    jrtok.train_motion(tiny_config(3), on_step=steps.append)
    assert [s["step"] for s in steps] == [0, 1, 2]
    assert {"total", "recon", "perplexity"} <= set(steps[0])

    path = str(tmp_path / "imu.mjc")
    imu.save(path)
    loaded = jrtok.ImuCheckpoint.load(path)
    assert loaded.codebook_digest == imu.codebook_digest
    with pytest.raises(jrtok.JrtokError, match="CheckpointMismatch"):
        jrtok.MotionCheckpoint.load(path)


def test_streaming_matches_offline(trained):
    _, _, imu, _ = trained
    raw = jrtok.synthetic_imu(5, duration=2.0)
    offline = jrtok.tokenize_offline(imu, raw)
    assert len(offline) == 120 // 16 * 4
    s = jrtok.StreamState(imu)
    online = []
    for start in range(0, 120, 7):
        online += s.push_frames(raw[start : start + 7])
    assert online == offline.tokens
    assert s.buffered == 120 % 16

    blob = offline.to_bytes()
    assert jrtok.TokenSequence.from_bytes(blob) == offline
    decoded = jrtok.decode_stream(offline, imu)
    assert decoded.shape == (len(offline) * 4, jrtok.MOTION_WIDTH)


def test_baseline_and_benchmark(trained):
    _, motion, imu, base = trained
    pred = base.predict(jrtok.synthetic_imu(6, duration=1.0))
    assert pred.shape == (60, jrtok.MOTION_WIDTH)
    report = jrtok.noise_benchmark(imu, motion, base, levels=[1], sequences=2, duration=0.6)
    methods = {(r["method"], r["noised"]) for r in report["rows"]}
    assert methods == {("tokenized", 0), ("tokenized", 1), ("baseline", 0), ("baseline", 1)}
    assert "MPJPE" in report["table"]
