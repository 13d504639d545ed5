// Copyright 2026 The polyprop Authors.
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

#ifndef POLYPROP_EXTRACTION_H_
#define POLYPROP_EXTRACTION_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "polyprop/quantity.h"
#include "polyprop/registry.h"

namespace polyprop {

// Document format:
//
//   == SAMPLE <id> ==
//   Sample: <material description>
//   Synthesis: <processing description>
//   <measurement prose, one or more lines>
//   == END SAMPLE ==
//
// Blank lines and '#' comments may appear between sections. Sample: and
// Synthesis: lines may repeat; their text is concatenated. Only the
// measurement prose is scanned for property values.

struct SampleSection {
  std::string sample_id;
  std::string sample_text;
  std::string synthesis_text;
};

struct PropertyObservation {
  std::string record_id;  // "<sample_id>#<ordinal>"
  std::string sample_id;
  int head_id = -1;
  Quantity quantity;
  // Present for points and ranges whose unit converts to the head's unit.
  std::optional<double> canonical_value;
  std::size_t span_begin = 0;
  std::size_t span_end = 0;
};

struct Extraction {
  std::vector<SampleSection> samples;
  std::vector<PropertyObservation> observations;
  int unmapped = 0;      // quantities with no registered property nearby
  int incompatible = 0;  // mapped, but the unit does not fit the head
};

// Throws MalformedDocument on unbalanced or duplicate sample delimiters and
// on text outside any sample section.
Extraction extract_document(std::string_view doc,
                            const Registry& registry = Registry::builtin());

// Extracts several documents independently and concatenates the results in
// input order. Sample ids must be unique across documents.
Extraction extract_documents(const std::vector<std::string>& docs,
                             const Registry& registry = Registry::builtin());

std::string extraction_to_json(const Extraction& ex,
                               const Registry& registry = Registry::builtin());
Extraction extraction_from_json(std::string_view text,
                                const Registry& registry = Registry::builtin());

}  // namespace polyprop

#endif  // POLYPROP_EXTRACTION_H_
