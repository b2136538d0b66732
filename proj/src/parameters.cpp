// Copyright 2026 The Seqlab Authors.
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

#include "seqlab/parameters.hpp"

#include <cmath>

#include "seqlab/error.hpp"

namespace seqlab {

ParameterSet zeros_like(const ParameterSet &like) {
  ParameterSet out;
  for_each_array(
      [](const ArrayInfo &, Matrix &dst, const Matrix &src) {
        dst = Matrix(src.rows(), src.cols());
      },
      out, like);
  return out;
}

bool same_shapes(const ParameterSet &a, const ParameterSet &b) {
  bool same = true;
  for_each_array(
      [&](const ArrayInfo &, const Matrix &x, const Matrix &y) {
        same = same && x.same_shape(y);
      },
      a, b);
  return same;
}

void add_scaled(ParameterSet &a, const ParameterSet &b, double scale) {
  for_each_array(
      [&](const ArrayInfo &info, Matrix &x, const Matrix &y) {
        if (!x.same_shape(y)) {
          throw ShapeError(std::string("shape mismatch in ") +
                           std::string(info.name));
        }
        auto xs = x.values();
        auto ys = y.values();
        for (std::size_t i = 0; i < xs.size(); ++i) xs[i] += scale * ys[i];
      },
      a, b);
}

void scale(ParameterSet &a, double factor) {
  for_each_array(
      [&](const ArrayInfo &, Matrix &x) {
        for (double &v : x.values()) v *= factor;
      },
      a);
}

double global_norm(const ParameterSet &a) {
  double sq = 0.0;
  for_each_array(
      [&](const ArrayInfo &, const Matrix &x) {
        for (double v : x.values()) sq += v * v;
      },
      a);
  return std::sqrt(sq);
}

bool all_finite(const ParameterSet &a) {
  bool ok = true;
  for_each_array(
      [&](const ArrayInfo &, const Matrix &x) {
        for (double v : x.values()) ok = ok && std::isfinite(v);
      },
      a);
  return ok;
}

}  // namespace seqlab
