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

#ifndef GATESBAND_DISTRIBUTIONS_H_
#define GATESBAND_DISTRIBUTIONS_H_

namespace gatesband {

double StandardNormalCdf(double x);
double StandardNormalPdf(double x);
// Inverse of StandardNormalCdf on (0, 1).
double StandardNormalQuantile(double probability);

}  // namespace gatesband

#endif  // GATESBAND_DISTRIBUTIONS_H_
