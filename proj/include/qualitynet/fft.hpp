// Copyright 2026 The QualityNet Authors. All Rights Reserved.
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

#ifndef QUALITYNET_FFT_HPP_
#define QUALITYNET_FFT_HPP_

#include <complex>
#include <vector>

namespace qnet {

// In-place iterative radix-2 FFT. Size must be a power of two.
// The inverse transform includes the 1/N scale.
void fft_inplace(std::vector<std::complex<double>>& data, bool inverse);

}  // namespace qnet

#endif  // QUALITYNET_FFT_HPP_
