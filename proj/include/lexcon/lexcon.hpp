// Copyright 2026 The lexcon Authors.
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

#include "lexcon/analysis.hpp"
#include "lexcon/constraints.hpp"
#include "lexcon/decoder.hpp"
#include "lexcon/error.hpp"
#include "lexcon/io.hpp"
#include "lexcon/ngram.hpp"
#include "lexcon/oracle.hpp"
#include "lexcon/score_matrix.hpp"
#include "lexcon/scorers.hpp"
#include "lexcon/vocab.hpp"
