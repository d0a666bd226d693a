# Copyright 2026-present the latentsearch project
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

"""Latent-space vector search: autoencoder compression, HNSW and flat search."""

from latentsearch._core import (
    ArgumentError,
    AutoencoderModel,
    DataError,
    DegenerateVectorError,
    EmbeddingSet,
    Error,
    FlatIndex,
    FormatError,
    HnswIndex,
    HybridPipeline,
    IoError,
    ParseError,
    ShapeError,
    SpaceTag,
    StateError,
    build_flat,
    compare_json,
    generate_synthetic,
    gradient_check,
    init_model,
    load_aem1,
    load_emb1,
    reconstruction_loss,
    save_aem1,
    save_emb1,
    train,
    utility,
)

__all__ = [name for name in dir() if not name.startswith("_")]
