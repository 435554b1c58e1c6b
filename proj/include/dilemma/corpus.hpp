#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dilemma {

enum class CaseSource { GeorgiaCtsa, OnlineEthicsCenter };

struct DilemmaCase {
    std::string id;
    std::string title;
    std::string description;
    std::string category;
    CaseSource source = CaseSource::GeorgiaCtsa;
};

enum class SectionKind { Introduction, KeyFactors, Historical, Resolution, Takeaways };

inline constexpr std::array<SectionKind, 5> kAllSections = {
    SectionKind::Introduction, SectionKind::KeyFactors, SectionKind::Historical,
    SectionKind::Resolution, SectionKind::Takeaways};

/// Canonical heading as written after the `%` marker, e.g. "Key Factors in Consideration".
std::string_view section_heading(SectionKind kind);
/// Short snake_case key used in JSON and config files ("key_factors").
std::string_view section_key(SectionKind kind);
SectionKind section_from_key(std::string_view key);
/// Column label used in per-section tables ("Factors").
std::string_view section_label(SectionKind kind);

/// Sections that appear in a document. Absent keys read as empty text.
using SectionMap = std::map<SectionKind, std::string>;

const std::string& section_text(const SectionMap& sections, SectionKind kind);

/// Splits `%Heading:` delimited text into sections. Headings match
/// case-insensitively, tolerate a trailing colon, surrounding whitespace and
/// `&`/`and`. Text after the colon on a heading line starts that section's
/// body. Text before the first heading is not part of any section and is
/// dropped. Repeated headings append to the same section.
SectionMap parse_sectioned_text(std::string_view raw);

/// Emits all five sections in fixed order, each preceded by `%Heading:`.
/// Empty bodies produce just the heading line.
std::string render_sectioned_text(const SectionMap& sections);

/// Like render_sectioned_text, but only for the sections present in the map.
std::string render_present_sections(const SectionMap& sections);

/// Adds empty entries for any missing section.
SectionMap complete_sections(SectionMap sections);

enum class AuthorKind { ExpertRef, Llm, Human };

struct Author {
    AuthorKind kind = AuthorKind::Llm;
    /// Preprocessor model, evaluated model or participant id, by kind.
    std::string name;

    friend bool operator==(const Author&, const Author&) = default;
};

std::string_view to_string(AuthorKind kind);

struct StructuredResponse {
    std::string case_id;
    Author author;
    SectionMap sections;
};

/// Throws SectionRuleViolation if the response breaks its author's section rule:
/// expert and llm responses carry all five sections, human responses exactly KeyFactors.
void validate_sections(const StructuredResponse& response);

struct ReferenceSet {
    std::string case_id;
    std::vector<StructuredResponse> references;
};

struct LoadOptions {
    /// Required number of references per case; nullopt accepts any count.
    std::optional<std::size_t> references_per_case = 4;
};

struct Corpus {
    std::vector<DilemmaCase> cases;
    std::map<std::string, ReferenceSet> references;
    /// LLM answers, sorted by (model, case_id).
    std::vector<StructuredResponse> responses;
    /// Human answers, sorted by (participant, case_id).
    std::vector<StructuredResponse> humans;
    /// SHA-256 over every loaded file's relative path and bytes.
    std::string content_hash;

    const DilemmaCase* find_case(std::string_view id) const;
    /// All llm model ids followed by all human participant ids, each group sorted.
    std::vector<Author> authors() const;
    const StructuredResponse* find_response(const Author& author, std::string_view case_id) const;
};

/// Loads the on-disk layout: cases/*.json, references/<case>/<model>.txt,
/// responses/<model>/<case>.txt, humans/<participant>/<case>.txt.
Corpus load_corpus(const std::filesystem::path& root, const LoadOptions& options = {});

std::string case_to_json(const DilemmaCase& c);
DilemmaCase case_from_json(std::string_view json_text);

}  // namespace dilemma
