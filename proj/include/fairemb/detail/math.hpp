// Copyright 2026 The fairemb Authors
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

#ifndef FAIREMB_DETAIL_MATH_HPP_
#define FAIREMB_DETAIL_MATH_HPP_

#include <cmath>

namespace fairemb::detail {

template <typename Scalar>
inline Scalar logistic(Scalar x) {
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

// log(1 + exp(x)) without overflow.
template <typename Scalar>
inline Scalar softplus(Scalar x) {
  if (x > Scalar(0)) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

template <typename Scalar>
inline Scalar logit(Scalar p) {
  return std::log(p) - std::log1p(-p);
}

}  // namespace fairemb::detail

#endif  // FAIREMB_DETAIL_MATH_HPP_
