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
#pragma once

#include <stdexcept>
#include <string>

namespace ahc {

enum class ErrKind {
  syntax,
  semantic,
  binding,
  sort,
  missing_binding,
  capacity,
  assumption_violated,
  not_admissible,
  not_forall_exists,
  script_invalid,
  not_winning,
  io,
};

const char* err_kind_name(ErrKind k);

class Error : public std::runtime_error {
public:
  Error(ErrKind k, std::string msg)
      : std::runtime_error(std::move(msg)), kind(k) {}

  ErrKind kind;
};

[[noreturn]] void fail(ErrKind k, const std::string& msg);

// Position-carrying variant for the two text formats.
[[noreturn]] void fail_at(ErrKind k, unsigned line, unsigned col,
                          const std::string& msg);

// Always-on internal invariant check, independent of NDEBUG.
#define AHC_CHECK(cond, msg)                                             \
  do {                                                                   \
    if (!(cond))                                                         \
      throw std::logic_error(std::string("internal invariant failed: ") \
                             + (msg));                                   \
  } while (0)

}  // namespace ahc
