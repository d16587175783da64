// Copyright 2026 The mimicsr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "mimicsr/image.hpp"

namespace mimicsr {

// Encode to baseline JPEG at `quality` (1..100, libjpeg defaults otherwise)
// and decode back. Input is clamped and quantized to 8 bits first.
Image jpeg_roundtrip(const Image& img, int quality);

}  // namespace mimicsr
