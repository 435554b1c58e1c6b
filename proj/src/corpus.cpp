#include "dilemma/corpus.hpp"

#include "dilemma/error.hpp"
#include "dilemma/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>

namespace fs = std::filesystem;
using nlohmann::json;

namespace dilemma {

namespace {

std::string normalize_heading(std::string_view raw) {
    std::string spaced;
    for (char c : raw) {
        if (c == '&') {
            spaced += " and ";
        } else {
            spaced.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    std::string out;
    bool pending_space = false;
    for (char c : spaced) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

std::optional<SectionKind> match_heading(std::string_view candidate) {
    const auto norm = normalize_heading(candidate);
    for (auto kind : kAllSections) {
        if (norm == normalize_heading(section_heading(kind))) return kind;
    }
    return std::nullopt;
}

const std::string kEmpty;

}  // namespace

std::string_view section_heading(SectionKind kind) {
    switch (kind) {
        case SectionKind::Introduction: return "Introduction";
        case SectionKind::KeyFactors: return "Key Factors in Consideration";
        case SectionKind::Historical: return "Historical & Theoretical Perspectives";
        case SectionKind::Resolution: return "Proposed Resolution Strategies";
        case SectionKind::Takeaways: return "Key Takeaways";
    }
    return "";
}

std::string_view section_key(SectionKind kind) {
    switch (kind) {
        case SectionKind::Introduction: return "introduction";
        case SectionKind::KeyFactors: return "key_factors";
        case SectionKind::Historical: return "historical";
        case SectionKind::Resolution: return "resolution";
        case SectionKind::Takeaways: return "takeaways";
    }
    return "";
}

SectionKind section_from_key(std::string_view key) {
    for (auto kind : kAllSections) {
        if (section_key(kind) == key) return kind;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown section key '" + std::string(key) + "'");
}

std::string_view section_label(SectionKind kind) {
    switch (kind) {
        case SectionKind::Introduction: return "Intro";
        case SectionKind::KeyFactors: return "Factors";
        case SectionKind::Historical: return "Historical";
        case SectionKind::Resolution: return "Resolution";
        case SectionKind::Takeaways: return "Takeaways";
    }
    return "";
}

const std::string& section_text(const SectionMap& sections, SectionKind kind) {
    auto it = sections.find(kind);
    return it == sections.end() ? kEmpty : it->second;
}

SectionMap parse_sectioned_text(std::string_view raw) {
    SectionMap sections;
    std::optional<SectionKind> current;
    std::map<SectionKind, std::string> bodies;

    std::size_t pos = 0;
    while (pos <= raw.size()) {
        auto nl = raw.find('\n', pos);
        if (nl == std::string_view::npos) nl = raw.size();
        std::string_view line = raw.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos = nl + 1;

        const auto lead = trim(line);
        if (!lead.empty() && lead.front() == '%') {
            const auto content = lead.substr(1);
            std::optional<SectionKind> kind;
            std::string_view inline_body;
            if (auto colon = content.find(':'); colon != std::string_view::npos) {
                kind = match_heading(content.substr(0, colon));
                if (kind) inline_body = trim(content.substr(colon + 1));
            }
            if (!kind) kind = match_heading(content);
            if (!kind) {
                throw Error(ErrorCode::UnknownSectionHeading, std::string(trim(content)));
            }
            current = kind;
            auto& body = bodies[*kind];
            if (!inline_body.empty()) {
                if (!body.empty()) body.push_back('\n');
                body.append(inline_body);
            }
            continue;
        }
        if (current) {
            auto& body = bodies[*current];
            body.push_back('\n');
            body.append(line);
        }
        if (nl == raw.size()) break;
    }

    if (bodies.empty()) throw Error(ErrorCode::NoSectionsFound, "no %-delimited section headings");
    for (auto& [kind, body] : bodies) sections[kind] = std::string(trim(body));
    return sections;
}

std::string render_sectioned_text(const SectionMap& sections) {
    std::string out;
    for (auto kind : kAllSections) {
        out += '%';
        out += section_heading(kind);
        out += ":\n";
        const auto body = trim(section_text(sections, kind));
        if (!body.empty()) {
            out += body;
            out += '\n';
        }
    }
    return out;
}

std::string render_present_sections(const SectionMap& sections) {
    std::string out;
    for (const auto& [kind, text] : sections) {
        out += '%';
        out += section_heading(kind);
        out += ":\n";
        const auto body = trim(text);
        if (!body.empty()) {
            out += body;
            out += '\n';
        }
    }
    return out;
}

SectionMap complete_sections(SectionMap sections) {
    for (auto kind : kAllSections) sections.try_emplace(kind);
    return sections;
}

std::string_view to_string(AuthorKind kind) {
    switch (kind) {
        case AuthorKind::ExpertRef: return "expert_ref";
        case AuthorKind::Llm: return "llm";
        case AuthorKind::Human: return "human";
    }
    return "";
}

void validate_sections(const StructuredResponse& response) {
    const auto& who = response.author.name;
    if (response.author.kind == AuthorKind::Human) {
        for (const auto& [kind, text] : response.sections) {
            if (kind != SectionKind::KeyFactors) {
                throw Error(ErrorCode::SectionRuleViolation,
                            "human '" + who + "' has section " + std::string(section_heading(kind)));
            }
        }
        if (!response.sections.contains(SectionKind::KeyFactors)) {
            throw Error(ErrorCode::SectionRuleViolation, "human '" + who + "' lacks Key Factors");
        }
        return;
    }
    for (auto kind : kAllSections) {
        if (!response.sections.contains(kind)) {
            throw Error(ErrorCode::SectionRuleViolation,
                        std::string(to_string(response.author.kind)) + " '" + who + "' lacks " +
                            std::string(section_heading(kind)));
        }
    }
}

const DilemmaCase* Corpus::find_case(std::string_view id) const {
    auto it = std::find_if(cases.begin(), cases.end(), [&](const DilemmaCase& c) { return c.id == id; });
    return it == cases.end() ? nullptr : &*it;
}

std::vector<Author> Corpus::authors() const {
    std::vector<Author> out;
    for (const auto* group : {&responses, &humans}) {
        for (const auto& r : *group) {
            if (out.empty() || !(out.back() == r.author)) out.push_back(r.author);
        }
    }
    return out;
}

const StructuredResponse* Corpus::find_response(const Author& author, std::string_view case_id) const {
    const auto& group = author.kind == AuthorKind::Human ? humans : responses;
    for (const auto& r : group) {
        if (r.author == author && r.case_id == case_id) return &r;
    }
    return nullptr;
}

namespace {

CaseSource source_from_string(const std::string& s) {
    if (s == "georgia_ctsa") return CaseSource::GeorgiaCtsa;
    if (s == "online_ethics_center") return CaseSource::OnlineEthicsCenter;
    throw Error(ErrorCode::MalformedRecord, "unknown source '" + s + "'");
}

std::string source_to_string(CaseSource s) {
    return s == CaseSource::GeorgiaCtsa ? "georgia_ctsa" : "online_ethics_center";
}

std::vector<fs::path> sorted_entries(const fs::path& dir, bool directories) {
    std::vector<fs::path> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (directories ? entry.is_directory() : entry.is_regular_file()) out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct Hasher {
    fs::path root;
    std::string manifest;

    std::string read(const fs::path& p) {
        auto bytes = read_file(p);
        manifest += fs::relative(p, root).generic_string();
        manifest += '\0';
        manifest += sha256_hex(bytes);
        manifest += '\n';
        return bytes;
    }
};

StructuredResponse load_sectioned(Hasher& hasher, const fs::path& file, std::string case_id, Author author) {
    auto raw = hasher.read(file);
    StructuredResponse r{std::move(case_id), std::move(author), {}};
    try {
        r.sections = parse_sectioned_text(raw);
    } catch (const Error& e) {
        throw Error(ErrorCode::MalformedRecord, file.string() + ": " + e.what());
    }
    if (r.author.kind != AuthorKind::Human) r.sections = complete_sections(std::move(r.sections));
    return r;
}

}  // namespace

std::string case_to_json(const DilemmaCase& c) {
    json j = {{"id", c.id},
              {"title", c.title},
              {"description", c.description},
              {"category", c.category},
              {"source", source_to_string(c.source)}};
    return j.dump(2) + "\n";
}

DilemmaCase case_from_json(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedRecord, e.what());
    }
    DilemmaCase c;
    try {
        c.id = j.at("id").get<std::string>();
        c.title = j.value("title", "");
        c.description = j.at("description").get<std::string>();
        c.category = j.value("category", "");
        c.source = source_from_string(j.value("source", "georgia_ctsa"));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedRecord, e.what());
    }
    if (c.id.empty()) throw Error(ErrorCode::MalformedRecord, "empty case id");
    if (trim(c.description).empty()) throw Error(ErrorCode::MalformedRecord, "case '" + c.id + "' has empty description");
    return c;
}

Corpus load_corpus(const fs::path& root, const LoadOptions& options) {
    if (!fs::is_directory(root)) throw Error(ErrorCode::Io, "corpus directory not found: " + root.string());
    Corpus corpus;
    Hasher hasher{root, {}};

    for (const auto& file : sorted_entries(root / "cases", false)) {
        if (file.extension() != ".json") continue;
        DilemmaCase c;
        try {
            c = case_from_json(hasher.read(file));
        } catch (const Error& e) {
            throw Error(ErrorCode::MalformedRecord, file.string() + ": " + e.detail());
        }
        if (corpus.find_case(c.id)) throw Error(ErrorCode::MalformedRecord, file.string() + ": duplicate case id " + c.id);
        corpus.cases.push_back(std::move(c));
    }

    const auto require_case = [&](const std::string& id, const fs::path& where) {
        if (!corpus.find_case(id)) throw Error(ErrorCode::MissingCase, id + " (referenced by " + where.string() + ")");
    };

    for (const auto& case_dir : sorted_entries(root / "references", true)) {
        const auto case_id = case_dir.filename().string();
        require_case(case_id, case_dir);
        ReferenceSet set{case_id, {}};
        for (const auto& file : sorted_entries(case_dir, false)) {
            if (file.extension() != ".txt") continue;
            set.references.push_back(
                load_sectioned(hasher, file, case_id, {AuthorKind::ExpertRef, file.stem().string()}));
        }
        if (options.references_per_case && set.references.size() != *options.references_per_case) {
            throw Error(ErrorCode::MalformedRecord,
                        case_dir.string() + ": expected " + std::to_string(*options.references_per_case) +
                            " references, found " + std::to_string(set.references.size()));
        }
        corpus.references.emplace(case_id, std::move(set));
    }

    const auto load_group = [&](const char* sub, AuthorKind kind, std::vector<StructuredResponse>& into) {
        for (const auto& author_dir : sorted_entries(root / sub, true)) {
            const auto name = author_dir.filename().string();
            for (const auto& file : sorted_entries(author_dir, false)) {
                if (file.extension() != ".txt") continue;
                const auto case_id = file.stem().string();
                require_case(case_id, file);
                auto r = load_sectioned(hasher, file, case_id, {kind, name});
                validate_sections(r);
                into.push_back(std::move(r));
            }
        }
    };
    load_group("responses", AuthorKind::Llm, corpus.responses);
    load_group("humans", AuthorKind::Human, corpus.humans);

    corpus.content_hash = sha256_hex(hasher.manifest);
    return corpus;
}

}  // namespace dilemma
