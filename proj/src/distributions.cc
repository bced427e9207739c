/*
 * Copyright 2026 The GatesBand Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "gatesband/distributions.h"

#include <boost/math/distributions/normal.hpp>

namespace gatesband {

double StandardNormalCdf(double x) {
  return boost::math::cdf(boost::math::normal_distribution<double>(), x);
}

double StandardNormalPdf(double x) {
  return boost::math::pdf(boost::math::normal_distribution<double>(), x);
}

double StandardNormalQuantile(double probability) {
  return boost::math::quantile(boost::math::normal_distribution<double>(),
                               probability);
}

}  // namespace gatesband
