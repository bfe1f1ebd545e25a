// Copyright 2026 The nullcal Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nullcal/nn/denoiser.hpp"
#include "nullcal/nn/mlp.hpp"

namespace nullcal::nn {

std::string to_string(Activation act) {
  switch (act) {
    case Activation::silu:
      return "silu";
    case Activation::tanh:
      return "tanh";
    case Activation::identity:
      return "identity";
  }
  return "silu";
}

Activation activation_from_string(const std::string& name) {
  if (name == "silu") return Activation::silu;
  if (name == "tanh") return Activation::tanh;
  if (name == "identity") return Activation::identity;
  throw InvalidConfig("unknown activation '" + name + "'");
}

std::string to_string(Conditioning mode) { return mode == Conditioning::film ? "film" : "concat"; }

Conditioning conditioning_from_string(const std::string& name) {
  if (name == "concat") return Conditioning::concat;
  if (name == "film") return Conditioning::film;
  throw InvalidConfig("unknown conditioning '" + name + "'");
}

}  // namespace nullcal::nn
