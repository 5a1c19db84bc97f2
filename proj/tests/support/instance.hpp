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

#include <memory>
#include <string>
#include <vector>

#include "ahc/formula.hpp"
#include "ahc/ts.hpp"
#include "corpus.hpp"

namespace ahc::testing {

// A parsed system set plus formula with every trace bound. Trace i binds
// to systems[min(i, last)], so a single system serves any prefix length.
// Heap-allocated because the binding points into the member vectors.
struct Instance {
  std::vector<TransitionSystem> systems;
  AhltlFormula f;
  Binding bi;
};

inline std::unique_ptr<Instance> make_instance(
    const std::vector<std::string>& sys_texts, const std::string& f_text) {
  auto in = std::make_unique<Instance>();
  for (const std::string& t : sys_texts)
    in->systems.push_back(parse_system(t));
  in->f = parse_formula(f_text);
  for (size_t t = 0; t < in->f.traces.size(); ++t)
    in->bi.systems.push_back(
        &in->systems[t < in->systems.size() ? t : in->systems.size() - 1]);
  return in;
}

inline std::unique_ptr<Instance> corpus_instance(
    const std::vector<std::string>& sys_files, const std::string& f_file) {
  std::vector<std::string> texts;
  for (const std::string& s : sys_files) texts.push_back(read_corpus_file(s));
  return make_instance(texts, read_corpus_file(f_file));
}

}  // namespace ahc::testing
