#include "icl/perturbation.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "icl/rng.hpp"

namespace icl {

namespace {

// "leading cue ':' spacing {}" per slot, plus trailing text after the last
// slot. All shipped templates fit this shape; anything else errors.
struct TemplateShape {
    struct Segment {
        std::string leading;  // whitespace before the cue (e.g. "\n")
        std::string cue;
        std::string spacing;  // between ':' and the slot, usually " "
    };
    std::vector<Segment> segments;
    std::string tail;

    std::string rebuild(const std::vector<std::string>& cues) const {
        if (cues.size() != segments.size())
            throw std::runtime_error("cue count does not match template slots");
        std::string out;
        for (size_t i = 0; i < segments.size(); ++i) {
            out += segments[i].leading;
            out += cues[i];
            out += ':';
            out += segments[i].spacing;
            out += "{}";
        }
        out += tail;
        return out;
    }

    std::string stripped() const {
        std::string out;
        for (const auto& s : segments) {
            out += s.leading;
            out += "{}";
        }
        out += tail;
        return out;
    }
};

TemplateShape parse_shape(const std::string& tmpl) {
    TemplateShape shape;
    size_t pos = 0;
    size_t slot = tmpl.find("{}");
    if (slot == std::string::npos)
        throw std::runtime_error("template has no {} slot: \"" + tmpl + "\"");
    while (slot != std::string::npos) {
        std::string chunk = tmpl.substr(pos, slot - pos);
        size_t colon = chunk.rfind(':');
        if (colon == std::string::npos)
            throw std::runtime_error("template segment lacks a cue before its slot: \"" + tmpl +
                                     "\"");
        TemplateShape::Segment seg;
        size_t lead = 0;
        while (lead < colon && std::isspace((unsigned char)chunk[lead])) ++lead;
        seg.leading = chunk.substr(0, lead);
        seg.cue = chunk.substr(lead, colon - lead);
        seg.spacing = chunk.substr(colon + 1);
        if (seg.cue.empty())
            throw std::runtime_error("template segment has an empty cue: \"" + tmpl + "\"");
        shape.segments.push_back(std::move(seg));
        pos = slot + 2;
        slot = tmpl.find("{}", pos);
    }
    shape.tail = tmpl.substr(pos);
    return shape;
}

constexpr int kRandomCueLen = 15;

std::string random_cue(Rng& rng) {
    std::string s(kRandomCueLen, 'a');
    for (auto& c : s) c = (char)('a' + rng.bounded(26));
    return s;
}

TemplatePair random_pair(const TaskSpec& task, Rng& rng) {
    TemplateShape in = parse_shape(task.template_in);
    TemplateShape out = parse_shape(task.template_out);
    std::vector<std::string> in_cues, out_cues;
    for (size_t i = 0; i < in.segments.size(); ++i) in_cues.push_back(random_cue(rng));
    for (size_t i = 0; i < out.segments.size(); ++i) out_cues.push_back(random_cue(rng));
    return {in.rebuild(in_cues), out.rebuild(out_cues)};
}

}  // namespace

std::vector<std::string> extract_cues(const std::string& tmpl) {
    std::vector<std::string> cues;
    for (const auto& seg : parse_shape(tmpl).segments) cues.push_back(seg.cue);
    return cues;
}

std::string replace_cues(const std::string& tmpl, const std::vector<std::string>& cues) {
    return parse_shape(tmpl).rebuild(cues);
}

std::string strip_cues(const std::string& tmpl) { return parse_shape(tmpl).stripped(); }

TemplateVariant standard_variant(const TaskSpec& task, int demo_count) {
    TemplateVariant v;
    v.kind = TemplateVariantKind::standard;
    v.entries.assign(demo_count + 1, {task.template_in, task.template_out});
    return v;
}

TemplateVariant gen_random_template(const TaskSpec& task, int demo_count, uint64_t seed,
                                    bool fixed) {
    Rng rng(seed);
    TemplateVariant v;
    v.kind = fixed ? TemplateVariantKind::random_fixed : TemplateVariantKind::random_nonfixed;
    if (fixed) {
        TemplatePair pair = random_pair(task, rng);
        v.entries.assign(demo_count + 1, pair);
    } else {
        for (int i = 0; i < demo_count + 1; ++i) v.entries.push_back(random_pair(task, rng));
    }
    return v;
}

TemplateVariant swap_templates(const TaskSpec& task, int demo_count) {
    TemplateShape in = parse_shape(task.template_in);
    TemplateShape out = parse_shape(task.template_out);
    std::vector<std::string> cues;
    for (const auto& s : in.segments) cues.push_back(s.cue);
    for (const auto& s : out.segments) cues.push_back(s.cue);
    bool all_same = std::all_of(cues.begin(), cues.end(),
                                [&](const std::string& c) { return c == cues.front(); });
    if (all_same)
        throw std::runtime_error("swap is a no-op: all template cues are \"" + cues.front() +
                                 "\"");
    std::rotate(cues.rbegin(), cues.rbegin() + 1, cues.rend());
    std::vector<std::string> in_cues(cues.begin(), cues.begin() + in.segments.size());
    std::vector<std::string> out_cues(cues.begin() + in.segments.size(), cues.end());
    TemplateVariant v;
    v.kind = TemplateVariantKind::swap;
    v.entries.assign(demo_count + 1, {in.rebuild(in_cues), out.rebuild(out_cues)});
    return v;
}

TemplateVariant named_template_set(const TaskSpec& task, int demo_count,
                                   const std::string& which) {
    using Pair = std::pair<const char*, const char*>;
    std::vector<Pair> pairs;
    if (which == "template1") {
        pairs = {{"dog", "cat"}, {"juice", "wine"}, {"sleep", "wake"}, {"bunny", "easter"}};
    } else if (which == "template2") {
        pairs = {{"dog", "cat"}, {"dog", "cat"}, {"dog", "cat"}, {"dog", "cat"}};
    } else if (which == "template3") {
        pairs = {{"article", "answer"},
                 {"input", "output"},
                 {"text", "label"},
                 {"sentence", "result"}};
    } else if (which == "template4") {
        pairs = {{"article", "answer"},
                 {"article", "answer"},
                 {"article", "answer"},
                 {"article", "answer"}};
    } else {
        throw std::runtime_error("unknown template set: \"" + which + "\"");
    }
    TemplateShape in = parse_shape(task.template_in);
    TemplateShape out = parse_shape(task.template_out);
    if (in.segments.size() != 1 || out.segments.size() != 1)
        throw std::runtime_error("named template sets require single-slot templates");
    if (demo_count + 1 > (int)pairs.size())
        throw std::runtime_error("named template sets cover at most " +
                                 std::to_string((int)pairs.size() - 1) + " demonstrations");
    TemplateVariant v;
    v.kind = TemplateVariantKind::named;
    for (int i = 0; i < demo_count + 1; ++i) {
        v.entries.push_back({in.rebuild({pairs[i].first}), out.rebuild({pairs[i].second})});
    }
    return v;
}

PromptComponents make_components(const TaskSpec& task, const std::vector<DatasetRecord>& demos,
                                 const DatasetRecord& test, const TemplateVariant& variant) {
    if ((int)variant.entries.size() != (int)demos.size() + 1)
        throw std::runtime_error("template variant has " +
                                 std::to_string(variant.entries.size()) + " entries for " +
                                 std::to_string(demos.size()) + " demonstrations");
    PromptComponents pc = make_components(task, demos, test);
    for (size_t i = 0; i < pc.demos.size(); ++i) {
        pc.demos[i].template_in = variant.entries[i].in;
        pc.demos[i].template_out = variant.entries[i].out;
    }
    pc.test.template_in = variant.entries.back().in;
    pc.test.template_out = variant.entries.back().out;
    return pc;
}

}  // namespace icl
