/*
 * Copyright 2026 The FedDCL Authors.
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

#pragma once

#include "feddcl/numkit/lstsq.hpp"
#include "feddcl/numkit/matrix.hpp"
#include "feddcl/numkit/orthogonal.hpp"
#include "feddcl/numkit/pca.hpp"
#include "feddcl/numkit/qr.hpp"
#include "feddcl/numkit/rng.hpp"
#include "feddcl/numkit/subspace.hpp"
#include "feddcl/numkit/svd.hpp"
