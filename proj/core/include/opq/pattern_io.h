// Copyright 2026 The OPQ Authors
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

#ifndef OPQ_PATTERN_IO_H
#define OPQ_PATTERN_IO_H

#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "opq/dqc1.h"
#include "opq/mbqc.h"

namespace opq {

/// Schema or reference error in a pattern file. `line` is 1-based, 0 when unknown.
class PatternParseError : public std::runtime_error {
   public:
    PatternParseError(const std::string &field, size_t line, const std::string &what);
    const std::string &field() const {
        return field_;
    }
    size_t line() const {
        return line_;
    }

   private:
    std::string field_;
    size_t line_;
};

/// On-disk pattern: an open graph, integer angles and an optional flow.
struct PatternDocument {
    OpenGraph graph;
    std::map<Tag, Angle> angles;
    std::optional<Flow> flow;
};

PatternDocument parse_pattern_document(const std::string &text);
PatternDocument load_pattern_document(const std::string &path);

/// Canonical JSON: fixed key order, vertex-ordered maps, two-space indent, trailing newline.
std::string pattern_document_json(const PatternDocument &doc);

/// Rewrites the document with its flow (searched for when absent). Throws PatternParseError on
/// field "flow" if the flow is invalid or none exists.
Pattern pattern_from_document(const PatternDocument &doc);
Pattern load_pattern_json(const std::string &path);

PatternDocument brickwork_document(const BrickworkSpec &spec, const std::map<Tag, Angle> &angles);

}  // namespace opq

#endif
