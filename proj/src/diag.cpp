/*
 * Copyright 2026 The ahc authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "ahc/diag.hpp"

namespace ahc {

const char* err_kind_name(ErrKind k) {
  switch (k) {
    case ErrKind::syntax: return "SyntaxError";
    case ErrKind::semantic: return "SemanticError";
    case ErrKind::binding: return "BindingError";
    case ErrKind::sort: return "SortError";
    case ErrKind::missing_binding: return "MissingBinding";
    case ErrKind::capacity: return "CapacityExceeded";
    case ErrKind::assumption_violated: return "AssumptionViolated";
    case ErrKind::not_admissible: return "NotAdmissible";
    case ErrKind::not_forall_exists: return "NotForallExists";
    case ErrKind::script_invalid: return "ScriptInvalid";
    case ErrKind::not_winning: return "NotWinning";
    case ErrKind::io: return "IoError";
  }
  return "Error";
}

void fail(ErrKind k, const std::string& msg) {
  throw Error(k, std::string(err_kind_name(k)) + ": " + msg);
}

void fail_at(ErrKind k, unsigned line, unsigned col, const std::string& msg) {
  throw Error(k, std::string(err_kind_name(k)) + ": line " +
                     std::to_string(line) + ", col " + std::to_string(col) +
                     ": " + msg);
}

}  // namespace ahc
