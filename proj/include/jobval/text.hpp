#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "jobval/common.hpp"
#include "jobval/csv.hpp"

namespace jobval {

// The ten broad attribute categories, fixed order.
inline const std::vector<std::string>& attribute_categories() {
    static const std::vector<std::string> cats = {
        "compensation_scheme", "financial_attributes", "career_opportunities",
        "hours_of_work",       "convenient_hours",     "inconvenient_hours",
        "contract_duration",   "workplace_attributes", "task_related_attributes",
        "minor_perks"};
    return cats;
}

struct AttributeInfo {
    std::string id;        // stable slug
    std::string name;      // human-readable
    int category = -1;     // index into attribute_categories()
};

// Vacancy record. Dates are day numbers (days since 1970-01-01);
// unlisted_day < 0 means missing.
struct AdRecord {
    int64_t ad_id = 0;
    int establishment_id = -1;
    int posted_day = 0;
    int unlisted_day = -1;
    int occupation = 0;  // 4-digit code
    std::string text;
    bool html_detected = false;
    bool online_posted = false;
    bool employer_name_disclosed = false;

    bool has_unlisted() const { return unlisted_day >= 0; }
};

// ---------------------------------------------------------------------------
// Tokenization and cleaning

namespace textdetail {

inline bool is_token_char(unsigned char c) {
    return std::isalnum(c) || c >= 0x80 || c == ',' || c == '.';
}

// ASCII + Latin-1 supplement lowercasing (covers ae/oe/aa ligatures and accents).
inline void lowercase_utf8(std::string& s) {
    for (size_t i = 0; i < s.size(); ++i) {
        unsigned char c = s[i];
        if (c < 0x80) {
            s[i] = static_cast<char>(std::tolower(c));
        } else if (c == 0xC3 && i + 1 < s.size()) {
            unsigned char d = s[i + 1];
            if (d >= 0x80 && d <= 0x9E && d != 0x97) s[i + 1] = static_cast<char>(d + 0x20);
            ++i;
        }
    }
}

inline bool is_number_token(const std::string& t, double* value) {
    if (t.empty()) return false;
    int digits = 0, seps = 0;
    for (char c : t) {
        if (std::isdigit(static_cast<unsigned char>(c))) {
            ++digits;
        } else if (c == ',' || c == '.') {
            ++seps;
            if (seps > 1) return false;
        } else {
            return false;
        }
    }
    if (digits == 0) return false;
    if (!t.empty() && (t.front() == ',' || t.front() == '.' || t.back() == ',' || t.back() == '.'))
        return false;
    std::string norm = t;
    std::replace(norm.begin(), norm.end(), ',', '.');
    *value = std::stod(norm);
    return true;
}

inline bool is_integer(double v) { return v == std::floor(v); }

}  // namespace textdetail

struct Sentence {
    std::vector<std::string> tokens;
    bool bullet = false;
};

struct CleanAd {
    std::vector<Sentence> sentences;
    bool html_flag = false;

    std::vector<std::string> all_tokens() const {
        std::vector<std::string> out;
        for (const auto& s : sentences) out.insert(out.end(), s.tokens.begin(), s.tokens.end());
        return out;
    }
};

inline const std::set<std::string>& default_abbreviations() {
    static const std::set<std::string> abbr = {"ca",  "f.eks", "bl.a", "mv",  "evt", "inkl",
                                               "tlf", "nr",    "osv",  "e.l", "m.m", "pr",
                                               "jf",  "kr",    "mrd",  "mill"};
    return abbr;
}

// Strips HTML tags (flagging ads that contain them), lowercases, splits
// lines into sentences and sentences into tokens. Bullet markers
// (leading -, *, centered dot, bullet, or an <li> tag) are preserved on
// every sentence of the line so list structure survives cleaning.
inline CleanAd clean_text(const std::string& raw,
                          const std::set<std::string>& abbreviations = default_abbreviations()) {
    CleanAd out;

    // Split into lines first; tags may introduce line structure of
    // their own (<li>, <br>, </p> act as line breaks).
    std::vector<std::pair<std::string, bool>> lines;  // text, bullet
    std::string cur;
    bool cur_bullet = false;
    auto flush_line = [&]() {
        lines.emplace_back(cur, cur_bullet);
        cur.clear();
        cur_bullet = false;
    };
    for (size_t i = 0; i < raw.size(); ++i) {
        char c = raw[i];
        if (c == '<') {
            size_t close = raw.find('>', i);
            if (close == std::string::npos) break;  // dangling tag: drop the rest
            std::string tag = raw.substr(i + 1, close - i - 1);
            textdetail::lowercase_utf8(tag);
            out.html_flag = true;
            bool is_li = tag.rfind("li", 0) == 0;
            bool is_break = tag.rfind("br", 0) == 0 || tag == "/p" || tag == "p" ||
                            tag == "/li" || tag == "/ul" || tag == "ul" || tag == "/ol" ||
                            tag == "ol" || tag == "/div" || tag == "div";
            if (is_li || is_break) {
                if (!cur.empty()) flush_line();
                cur_bullet = is_li;
            }
            i = close;
        } else if (c == '\n') {
            flush_line();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) flush_line();

    for (auto& [line, li_bullet] : lines) {
        textdetail::lowercase_utf8(line);
        // Leading plain-text bullet markers.
        size_t pos = 0;
        while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
        bool bullet = li_bullet;
        if (pos < line.size()) {
            if (line[pos] == '-' || line[pos] == '*') {
                bullet = true;
                ++pos;
            } else if (line.compare(pos, 2, "\xC2\xB7") == 0) {  // centered dot
                bullet = true;
                pos += 2;
            } else if (line.compare(pos, 3, "\xE2\x80\xA2") == 0) {  // bullet
                bullet = true;
                pos += 3;
            }
        }

        // Tokenize the rest of the line, splitting sentences at
        // terminal punctuation unless the preceding token is a known
        // abbreviation.
        Sentence sent;
        sent.bullet = bullet;
        std::string tok;
        auto push_token = [&]() {
            if (tok.empty()) return;
            // Trim stray separators picked up by the number-friendly
            // token characters.
            while (!tok.empty() && (tok.back() == ',' || tok.back() == '.')) tok.pop_back();
            while (!tok.empty() && (tok.front() == ',' || tok.front() == '.')) tok.erase(0, 1);
            if (!tok.empty()) sent.tokens.push_back(tok);
            tok.clear();
        };
        auto end_sentence = [&]() {
            push_token();
            if (!sent.tokens.empty()) {
                out.sentences.push_back(sent);
                sent.tokens.clear();
            }
        };
        for (size_t i = pos; i < line.size(); ++i) {
            unsigned char c = line[i];
            if (c == '.' || c == '!' || c == '?') {
                if (c == '.' && !tok.empty()) {
                    // Abbreviation or decimal number: keep the dot inside
                    // the token and continue the sentence.
                    bool next_is_digit = i + 1 < line.size() &&
                                         std::isdigit(static_cast<unsigned char>(line[i + 1]));
                    bool prev_is_digit = std::isdigit(static_cast<unsigned char>(tok.back()));
                    if ((prev_is_digit && next_is_digit) ||
                        abbreviations.count(tok + ".") || abbreviations.count(tok)) {
                        if (prev_is_digit && next_is_digit)
                            tok += '.';
                        else
                            push_token();
                        continue;
                    }
                }
                end_sentence();
            } else if (c == '%') {
                push_token();
                sent.tokens.push_back("%");
            } else if (textdetail::is_token_char(c)) {
                tok += static_cast<char>(c);
            } else {
                push_token();
            }
        }
        end_sentence();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Number flagging

inline const char* kPctLt100 = "PCT_LT_100";
inline const char* kPct100 = "PCT_100";
inline const char* kNum5_99 = "NUM_5_99";
inline const char* kNum100 = "NUM_100";
inline const char* kNumGt100 = "NUM_GT_100";

// Replaces numeric tokens with range flags. Numbers below (exactly at)
// 100 followed by a percent sign or the percent word collapse into a
// single part-time (full-time) flag; remaining small integers get their
// own flag so phrases like "2 ukers ferie" stay distinguishable.
inline std::vector<std::string> flag_numbers(const std::vector<std::string>& tokens) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (size_t i = 0; i < tokens.size(); ++i) {
        double v;
        if (!textdetail::is_number_token(tokens[i], &v)) {
            out.push_back(tokens[i]);
            continue;
        }
        bool pct = i + 1 < tokens.size() && (tokens[i + 1] == "%" || tokens[i + 1] == "prosent");
        if (pct && v < 100.0) {
            out.push_back(kPctLt100);
            ++i;
        } else if (pct && v == 100.0) {
            out.push_back(kPct100);
            ++i;
        } else if (v <= 4.0 && textdetail::is_integer(v)) {
            out.push_back("NUM_" + std::to_string(static_cast<int>(v)));
        } else if (v < 100.0) {
            out.push_back(kNum5_99);
        } else if (v == 100.0) {
            out.push_back(kNum100);
        } else {
            out.push_back(kNumGt100);
        }
    }
    return out;
}

inline CleanAd flag_numbers(const CleanAd& ad) {
    CleanAd out = ad;
    for (auto& s : out.sentences) s.tokens = flag_numbers(s.tokens);
    return out;
}

// ---------------------------------------------------------------------------
// Dictionary

struct AttributeDictionary {
    std::vector<AttributeInfo> attributes;
    std::unordered_map<std::string, int> expression_to_attr;  // normalized, space-joined
    int max_expression_len = 1;

    int n_attributes() const { return static_cast<int>(attributes.size()); }

    int attribute_index(const std::string& id) const {
        for (size_t i = 0; i < attributes.size(); ++i)
            if (attributes[i].id == id) return static_cast<int>(i);
        throw DataError("dictionary: unknown attribute '" + id + "'");
    }

    void add(const std::string& expression, const std::string& attr_id,
             const std::string& attr_name, const std::string& category) {
        int cat = -1;
        const auto& cats = attribute_categories();
        for (size_t c = 0; c < cats.size(); ++c)
            if (cats[c] == category) cat = static_cast<int>(c);
        if (cat < 0) throw DataError("dictionary: unknown category '" + category + "'");

        int idx = -1;
        for (size_t i = 0; i < attributes.size(); ++i)
            if (attributes[i].id == attr_id) idx = static_cast<int>(i);
        if (idx < 0) {
            idx = static_cast<int>(attributes.size());
            attributes.push_back({attr_id, attr_name, cat});
        } else if (attributes[idx].category != cat) {
            throw DataError("dictionary: attribute '" + attr_id + "' listed in two categories");
        }

        CleanAd c = clean_text(expression);
        std::vector<std::string> toks;
        for (const auto& s : c.sentences)
            toks.insert(toks.end(), s.tokens.begin(), s.tokens.end());
        // Number flags are stored verbatim; flag_numbers() would not
        // touch them anyway since they are not numeric tokens.
        if (toks.empty()) throw DataError("dictionary: empty expression for '" + attr_id + "'");
        if (toks.size() > 3)
            throw DataError("dictionary: expression longer than 3 tokens: '" + expression + "'");
        std::string key;
        for (const auto& t : toks) {
            if (!key.empty()) key += ' ';
            key += t;
        }
        auto [it, inserted] = expression_to_attr.try_emplace(key, idx);
        if (!inserted && it->second != idx)
            throw DataError("dictionary: expression '" + expression + "' maps to two attributes");
        max_expression_len = std::max(max_expression_len, static_cast<int>(toks.size()));
    }

    void validate() const {
        std::vector<int> counts(attributes.size(), 0);
        for (const auto& [k, a] : expression_to_attr) counts[a] += 1;
        for (size_t i = 0; i < attributes.size(); ++i)
            if (counts[i] == 0)
                throw DataError("dictionary: attribute '" + attributes[i].id +
                                "' has no expressions");
    }

    static AttributeDictionary load_csv(const std::string& path) {
        CsvTable t = read_csv(path);
        int ce = t.column("expression"), ci = t.column("attribute_id"),
            cn = t.column("attribute_name"), cc = t.column("category");
        AttributeDictionary d;
        for (const auto& row : t.rows) d.add(row[ce], row[ci], row[cn], row[cc]);
        d.validate();
        return d;
    }
};

// ---------------------------------------------------------------------------
// Matching

struct DetectionResult {
    std::vector<uint8_t> attribute;  // size n_attributes
    std::vector<uint8_t> category;   // size 10

    int attribute_count() const {
        int n = 0;
        for (auto b : attribute) n += b;
        return n;
    }
};

// An attribute is present iff one of its expressions occurs as a
// contiguous token subsequence within a single sentence. Multi-sentence
// spans never match.
inline DetectionResult detect_attributes(const CleanAd& flagged_ad,
                                         const AttributeDictionary& dict) {
    DetectionResult res;
    res.attribute.assign(dict.attributes.size(), 0);
    res.category.assign(attribute_categories().size(), 0);
    for (const auto& sent : flagged_ad.sentences) {
        const auto& toks = sent.tokens;
        for (size_t i = 0; i < toks.size(); ++i) {
            std::string key;
            for (int len = 1; len <= dict.max_expression_len; ++len) {
                if (i + len > toks.size()) break;
                if (len > 1) key += ' ';
                key += toks[i + len - 1];
                auto it = dict.expression_to_attr.find(key);
                if (it != dict.expression_to_attr.end()) res.attribute[it->second] = 1;
            }
        }
    }
    for (size_t a = 0; a < res.attribute.size(); ++a)
        if (res.attribute[a]) res.category[dict.attributes[a].category] = 1;
    return res;
}

inline DetectionResult detect_attributes(const std::string& raw_text,
                                         const AttributeDictionary& dict) {
    return detect_attributes(flag_numbers(clean_text(raw_text)), dict);
}

// ---------------------------------------------------------------------------
// Structured lists and n-grams

struct ExtractedList {
    Sentence header;  // empty tokens when the list opens the ad
    std::vector<Sentence> items;
};

// Maximal runs of >= 2 bullet sentences, attached to the immediately
// preceding non-bullet sentence.
inline std::vector<ExtractedList> extract_lists(const CleanAd& ad) {
    std::vector<ExtractedList> out;
    const auto& ss = ad.sentences;
    size_t i = 0;
    while (i < ss.size()) {
        if (!ss[i].bullet) {
            ++i;
            continue;
        }
        size_t j = i;
        while (j < ss.size() && ss[j].bullet) ++j;
        if (j - i >= 2) {
            ExtractedList lst;
            if (i > 0 && !ss[i - 1].bullet) lst.header = ss[i - 1];
            lst.items.assign(ss.begin() + i, ss.begin() + j);
            out.push_back(std::move(lst));
        }
        i = j;
    }
    return out;
}

struct NgramCount {
    std::string phrase;
    int64_t count = 0;
};

// Frequency-ranked 1..n_max grams over list items, excluding phrases
// that contain a stopword. Ties break lexicographically.
inline std::vector<NgramCount> top_ngrams(const std::vector<Sentence>& items, int n_max, size_t k,
                                          const std::set<std::string>& stopwords) {
    require(n_max >= 1, "top_ngrams: n_max must be positive");
    std::map<std::string, int64_t> counts;
    for (const auto& sent : items) {
        const auto& toks = sent.tokens;
        for (size_t i = 0; i < toks.size(); ++i) {
            std::string key;
            bool has_stop = false;
            for (int len = 1; len <= n_max && i + len <= toks.size(); ++len) {
                const std::string& t = toks[i + len - 1];
                if (stopwords.count(t)) has_stop = true;
                if (has_stop) break;
                if (len > 1) key += ' ';
                key += t;
                counts[key] += 1;
            }
        }
    }
    std::vector<NgramCount> out;
    out.reserve(counts.size());
    for (const auto& [p, c] : counts) out.push_back({p, c});
    std::sort(out.begin(), out.end(), [](const NgramCount& a, const NgramCount& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.phrase < b.phrase;
    });
    if (out.size() > k) out.resize(k);
    return out;
}

// ---------------------------------------------------------------------------
// Prevalence and validation

struct PrevalenceResult {
    std::vector<double> attr_share;
    std::vector<double> cat_share;
    double mean_attrs_per_ad = 0.0;
    int64_t n_ads = 0;
};

inline PrevalenceResult prevalence(const std::vector<DetectionResult>& detections) {
    require(!detections.empty(), "prevalence: empty ad set");
    PrevalenceResult out;
    out.n_ads = static_cast<int64_t>(detections.size());
    out.attr_share.assign(detections.front().attribute.size(), 0.0);
    out.cat_share.assign(detections.front().category.size(), 0.0);
    double total = 0.0;
    for (const auto& d : detections) {
        for (size_t a = 0; a < d.attribute.size(); ++a) out.attr_share[a] += d.attribute[a];
        for (size_t c = 0; c < d.category.size(); ++c) out.cat_share[c] += d.category[c];
        total += d.attribute_count();
    }
    for (auto& x : out.attr_share) x /= static_cast<double>(out.n_ads);
    for (auto& x : out.cat_share) x /= static_cast<double>(out.n_ads);
    out.mean_attrs_per_ad = total / static_cast<double>(out.n_ads);
    return out;
}

// Group-level prevalence; groups with no ads are reported in `empty_groups`
// and excluded from the result.
inline std::map<int, PrevalenceResult> prevalence_by_group(
    const std::vector<DetectionResult>& detections, const std::vector<int>& group_keys,
    const std::vector<int>& expected_groups, std::vector<int>* empty_groups = nullptr) {
    require(detections.size() == group_keys.size(), "prevalence_by_group: size mismatch");
    std::map<int, std::vector<DetectionResult>> buckets;
    for (size_t i = 0; i < detections.size(); ++i)
        buckets[group_keys[i]].push_back(detections[i]);
    std::map<int, PrevalenceResult> out;
    for (int g : expected_groups) {
        auto it = buckets.find(g);
        if (it == buckets.end() || it->second.empty()) {
            if (empty_groups) empty_groups->push_back(g);
            continue;
        }
        out[g] = prevalence(it->second);
    }
    return out;
}

struct ValidationMetrics {
    std::optional<double> success;      // (TP+TN)/N
    std::optional<double> precision;    // TP/(TP+FP), absent if never auto-detected
    std::optional<double> sensitivity;  // TP/(TP+FN), absent if never manually detected
};

inline ValidationMetrics validation_metrics(const std::vector<uint8_t>& auto_labels,
                                            const std::vector<uint8_t>& manual_labels) {
    require(auto_labels.size() == manual_labels.size(), "validation_metrics: length mismatch");
    int64_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (size_t i = 0; i < auto_labels.size(); ++i) {
        bool a = auto_labels[i] != 0, m = manual_labels[i] != 0;
        if (a && m) ++tp;
        else if (a && !m) ++fp;
        else if (!a && m) ++fn;
        else ++tn;
    }
    ValidationMetrics out;
    int64_t n = tp + fp + fn + tn;
    if (n > 0) out.success = static_cast<double>(tp + tn) / static_cast<double>(n);
    if (tp + fp > 0) out.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tp + fn > 0) out.sensitivity = static_cast<double>(tp) / static_cast<double>(tp + fn);
    return out;
}

inline const std::set<std::string>& default_stopwords() {
    static const std::set<std::string> sw = {
        "og",  "i",    "p\xC3\xA5", "for",  "med", "til", "av",  "en",    "et",  "som",
        "er",  "vi",   "du",        "deg",  "oss", "den", "det", "har",   "kan", "vil",
        "\xC3\xA5",    "om",        "ikke", "din", "v\xC3\xA5r", "ved",   "eller", "samt",
        "de",  "seg",  "sin",       "hos",  "fra", "blir", "v\xC3\xA6re", "dette"};
    return sw;
}

inline std::set<std::string> load_word_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("word list: cannot open " + path);
    std::set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n' || line.back() == ' '))
            line.pop_back();
        if (!line.empty() && line[0] != '#') out.insert(line);
    }
    return out;
}

}  // namespace jobval
