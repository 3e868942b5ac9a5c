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

#include "opq/pattern_io.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace opq {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

size_t line_of_offset(const std::string &text, size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + (size_t)std::count(text.begin(), text.begin() + (std::ptrdiff_t)offset, '\n');
}

// Best effort: line of the quoted key, or of the quoted sub-key after it for "key.sub".
size_t line_of_field(const std::string &text, const std::string &field) {
    size_t split = field.find_first_of(".[");
    size_t pos = text.find("\"" + field.substr(0, split) + "\"");
    if (pos == std::string::npos) {
        return 0;
    }
    if (split != std::string::npos && field[split] == '.') {
        size_t sub = text.find("\"" + field.substr(split + 1) + "\"", pos + 1);
        if (sub != std::string::npos) {
            pos = sub;
        }
    }
    return line_of_offset(text, pos);
}

class Reader {
   public:
    explicit Reader(const std::string &text) : text_(text) {
    }

    [[noreturn]] void fail(const std::string &field, const std::string &what) const {
        throw PatternParseError(field, line_of_field(text_, field), what);
    }

    std::vector<Tag> tag_list(const json &doc, const std::string &key) const {
        if (!doc.contains(key)) {
            fail(key, "missing required field");
        }
        const json &v = doc.at(key);
        if (!v.is_array()) {
            fail(key, "expected a list of vertex names");
        }
        std::vector<Tag> out;
        for (size_t i = 0; i < v.size(); i++) {
            if (!v[i].is_string()) {
                fail(key + "[" + std::to_string(i) + "]", "expected a string");
            }
            out.push_back(v[i].get<std::string>());
        }
        return out;
    }

    int integer(const json &v, const std::string &field) const {
        if (!v.is_number_integer()) {
            fail(field, "expected an integer");
        }
        return v.get<int>();
    }

    void known(const OpenGraph &g, const Tag &v, const std::string &field) const {
        if (!g.has_vertex(v)) {
            fail(field, "unknown vertex '" + v + "'");
        }
    }

   private:
    const std::string &text_;
};

// Longest-path levels of the flow constraint digraph; nullopt if it has a cycle.
std::optional<std::map<Tag, int>> derive_levels(const OpenGraph &g, const std::map<Tag, Tag> &successor) {
    std::map<Tag, std::set<Tag>> succ;
    std::map<Tag, int> indegree, level;
    for (const auto &v : g.vertices) {
        indegree[v] = 0;
        level[v] = 0;
    }
    for (const auto &[x, fx] : successor) {
        succ[x].insert(fx);
        for (const auto &y : g.neighbors(fx)) {
            if (y != x) {
                succ[x].insert(y);
            }
        }
    }
    for (const auto &[x, ys] : succ) {
        for (const auto &y : ys) {
            indegree[y]++;
        }
    }
    std::vector<Tag> queue;
    for (const auto &v : g.vertices) {
        if (indegree[v] == 0) {
            queue.push_back(v);
        }
    }
    for (size_t head = 0; head < queue.size(); head++) {
        Tag x = queue[head];
        for (const auto &y : succ[x]) {
            level[y] = std::max(level[y], level[x] + 1);
            if (--indegree[y] == 0) {
                queue.push_back(y);
            }
        }
    }
    if (queue.size() != g.vertices.size()) {
        return std::nullopt;
    }
    return level;
}

}  // namespace

PatternParseError::PatternParseError(const std::string &field, size_t line, const std::string &what)
    : std::runtime_error((line ? "line " + std::to_string(line) + ": " : std::string()) + "field '" + field +
                         "': " + what),
      field_(field),
      line_(line) {
}

PatternDocument parse_pattern_document(const std::string &text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        throw PatternParseError("<document>", line_of_offset(text, e.byte ? e.byte - 1 : 0), e.what());
    }
    Reader rd(text);
    if (!doc.is_object()) {
        rd.fail("<document>", "expected a JSON object");
    }
    static const std::set<std::string> allowed{"vertices", "edges", "input", "output", "angles", "flow", "levels"};
    for (const auto &[key, value] : doc.items()) {
        if (!allowed.count(key)) {
            rd.fail(key, "unknown field");
        }
    }

    PatternDocument out;
    OpenGraph &g = out.graph;
    g.vertices = rd.tag_list(doc, "vertices");
    std::set<Tag> seen;
    for (size_t i = 0; i < g.vertices.size(); i++) {
        if (!seen.insert(g.vertices[i]).second) {
            rd.fail("vertices[" + std::to_string(i) + "]", "duplicate vertex '" + g.vertices[i] + "'");
        }
    }
    if (!doc.contains("edges") || !doc["edges"].is_array()) {
        rd.fail("edges", "expected a list of vertex pairs");
    }
    for (size_t i = 0; i < doc["edges"].size(); i++) {
        const json &e = doc["edges"][i];
        std::string field = "edges[" + std::to_string(i) + "]";
        if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
            rd.fail(field, "expected a pair of vertex names");
        }
        Edge edge{e[0].get<std::string>(), e[1].get<std::string>()};
        rd.known(g, edge.first, field);
        rd.known(g, edge.second, field);
        g.edges.push_back(edge);
    }
    g.inputs = rd.tag_list(doc, "input");
    for (size_t i = 0; i < g.inputs.size(); i++) {
        rd.known(g, g.inputs[i], "input[" + std::to_string(i) + "]");
    }
    g.outputs = rd.tag_list(doc, "output");
    for (size_t i = 0; i < g.outputs.size(); i++) {
        rd.known(g, g.outputs[i], "output[" + std::to_string(i) + "]");
    }
    try {
        g.validate();
    } catch (const std::invalid_argument &e) {
        rd.fail("edges", e.what());
    }

    if (!doc.contains("angles") || !doc["angles"].is_object()) {
        rd.fail("angles", "expected an object mapping vertices to integers 0..7");
    }
    for (const auto &[v, a] : doc["angles"].items()) {
        std::string field = "angles." + v;
        rd.known(g, v, field);
        if (g.is_output(v)) {
            rd.fail(field, "output vertex '" + v + "' is not measured");
        }
        int value = rd.integer(a, field);
        if (value < 0 || value > 7) {
            rd.fail(field, "angle " + std::to_string(value) + " outside 0..7");
        }
        out.angles[v] = Angle(value);
    }
    for (const auto &v : g.non_outputs()) {
        if (!out.angles.count(v)) {
            rd.fail("angles." + v, "missing angle for measured vertex '" + v + "'");
        }
    }

    if (doc.contains("flow")) {
        if (!doc["flow"].is_object()) {
            rd.fail("flow", "expected an object mapping vertices to vertices");
        }
        Flow flow;
        for (const auto &[v, fv] : doc["flow"].items()) {
            std::string field = "flow." + v;
            rd.known(g, v, field);
            if (!fv.is_string()) {
                rd.fail(field, "expected a vertex name");
            }
            rd.known(g, fv.get<std::string>(), field);
            flow.successor[v] = fv.get<std::string>();
        }
        if (doc.contains("levels")) {
            if (!doc["levels"].is_object()) {
                rd.fail("levels", "expected an object mapping vertices to integers");
            }
            for (const auto &[v, lv] : doc["levels"].items()) {
                rd.known(g, v, "levels." + v);
                flow.level[v] = rd.integer(lv, "levels." + v);
            }
        } else if (auto levels = derive_levels(g, flow.successor)) {
            flow.level = *levels;
        } else {
            rd.fail("flow", "flow constraints are cyclic; no level function exists");
        }
        out.flow = flow;
    } else if (doc.contains("levels")) {
        rd.fail("levels", "levels given without a flow");
    }
    return out;
}

PatternDocument load_pattern_document(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw PatternParseError("<file>", 0, "cannot open '" + path + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_pattern_document(buf.str());
}

std::string pattern_document_json(const PatternDocument &doc) {
    const OpenGraph &g = doc.graph;
    ordered_json out;
    out["vertices"] = g.vertices;
    ordered_json edges = ordered_json::array();
    for (const auto &[a, b] : g.edges) {
        edges.push_back({a, b});
    }
    out["edges"] = edges;
    out["input"] = g.inputs;
    out["output"] = g.outputs;
    ordered_json angles = ordered_json::object();
    for (const auto &v : g.vertices) {
        auto it = doc.angles.find(v);
        if (it != doc.angles.end()) {
            angles[v] = it->second.eighths();
        }
    }
    out["angles"] = angles;
    if (doc.flow) {
        ordered_json flow = ordered_json::object(), levels = ordered_json::object();
        for (const auto &v : g.vertices) {
            auto it = doc.flow->successor.find(v);
            if (it != doc.flow->successor.end()) {
                flow[v] = it->second;
            }
            auto lt = doc.flow->level.find(v);
            if (lt != doc.flow->level.end()) {
                levels[v] = lt->second;
            }
        }
        out["flow"] = flow;
        out["levels"] = levels;
    }
    return out.dump(2) + "\n";
}

Pattern pattern_from_document(const PatternDocument &doc) {
    Flow flow;
    if (doc.flow) {
        auto violations = check_flow(doc.graph, *doc.flow);
        if (!violations.empty()) {
            throw PatternParseError("flow", 0, violations.front().rule + ": " + violations.front().message);
        }
        flow = *doc.flow;
    } else {
        std::optional<Flow> found;
        try {
            found = find_flow(doc.graph);
        } catch (const std::invalid_argument &e) {
            throw PatternParseError("flow", 0, std::string("no flow given and search not possible: ") + e.what());
        }
        if (!found) {
            throw PatternParseError("flow", 0, "open graph has no flow");
        }
        flow = *found;
    }
    return rewrite_with_flow(doc.graph, flow, doc.angles);
}

Pattern load_pattern_json(const std::string &path) {
    return pattern_from_document(load_pattern_document(path));
}

PatternDocument brickwork_document(const BrickworkSpec &spec, const std::map<Tag, Angle> &angles) {
    auto [graph, flow] = brickwork(spec);
    PatternDocument doc;
    doc.graph = graph;
    doc.flow = flow;
    for (const auto &v : graph.non_outputs()) {
        auto it = angles.find(v);
        doc.angles[v] = it == angles.end() ? Angle(0) : it->second;
    }
    return doc;
}

}  // namespace opq
