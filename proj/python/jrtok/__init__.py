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

"""Tokenized IMU-to-motion pipeline.

Sequences are float64 arrays of shape (frames, 271) for motion and
(frames, 72) for IMU readings.
"""

from ._jrtok import (
    IMU_WIDTH,
    MOTION_WIDTH,
    BaselineCheckpoint,
    ImuCheckpoint,
    JrtokError,
    MotionCheckpoint,
    StreamState,
    TokenSequence,
    TrainConfig,
    angular_velocity,
    corrupt_imu,
    decode_stream,
    jitter,
    joint_positions,
    js_divergence,
    matrix_to_rot6d,
    mpjpe,
    noise_benchmark,
    perplexity,
    quantize,
    rot6d_to_matrix,
    synthetic_imu,
    synthetic_motion,
    tokenize_offline,
    train_baseline,
    train_imu,
    train_motion,
    zipf_target,
)

__version__ = "0.1.0"
