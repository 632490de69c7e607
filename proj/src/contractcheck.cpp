#include "rugtrace/contractcheck.hpp"

#include <algorithm>
#include <map>
#include <regex>

namespace rugtrace::contractcheck {

std::string_view to_string(TrapdoorKind k) {
    switch (k) {
        case TrapdoorKind::owner_mint: return "owner_mint";
        case TrapdoorKind::transfer_blocklist: return "transfer_blocklist";
        case TrapdoorKind::pausable_transfer: return "pausable_transfer";
        case TrapdoorKind::mutable_fee: return "mutable_fee";
        case TrapdoorKind::max_tx_limit: return "max_tx_limit";
        case TrapdoorKind::honeypot_sell_restriction: return "honeypot_sell_restriction";
    }
    return "unknown";
}

const std::vector<TrapdoorKind>& all_kinds() {
    static const std::vector<TrapdoorKind> kinds{
        TrapdoorKind::owner_mint,   TrapdoorKind::transfer_blocklist, TrapdoorKind::pausable_transfer,
        TrapdoorKind::mutable_fee,  TrapdoorKind::max_tx_limit,       TrapdoorKind::honeypot_sell_restriction,
    };
    return kinds;
}

namespace {

constexpr std::size_t npos = std::string::npos;

/// Comments and string contents blanked out, offsets and newlines kept.
std::string strip(std::string_view src) {
    std::string out(src);
    std::size_t i = 0;
    while (i < out.size()) {
        if (out.compare(i, 2, "//") == 0) {
            while (i < out.size() && out[i] != '\n') out[i++] = ' ';
        } else if (out.compare(i, 2, "/*") == 0) {
            const std::size_t end = out.find("*/", i + 2);
            const std::size_t stop = end == npos ? out.size() : end + 2;
            for (; i < stop; ++i)
                if (out[i] != '\n') out[i] = ' ';
        } else if (out[i] == '"' || out[i] == '\'') {
            const char q = out[i++];
            while (i < out.size() && out[i] != q && out[i] != '\n') {
                if (out[i] == '\\' && i + 1 < out.size()) out[i++] = ' ';
                out[i++] = ' ';
            }
            ++i;
        } else {
            ++i;
        }
    }
    return out;
}

bool balanced(const std::string& s) {
    std::vector<char> stack;
    for (char c : s) {
        if (c == '(' || c == '{' || c == '[') {
            stack.push_back(c);
        } else if (c == ')' || c == '}' || c == ']') {
            const char want = c == ')' ? '(' : c == '}' ? '{' : '[';
            if (stack.empty() || stack.back() != want) return false;
            stack.pop_back();
        }
    }
    return stack.empty();
}

std::size_t match_close(const std::string& s, std::size_t open) {
    const char o = s[open];
    const char c = o == '(' ? ')' : o == '{' ? '}' : ']';
    int depth = 0;
    for (std::size_t i = open; i < s.size(); ++i) {
        if (s[i] == o) ++depth;
        else if (s[i] == c && --depth == 0) return i;
    }
    return npos;
}

bool is_ident(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }

std::string_view trim_view(std::string_view v) {
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
    return v;
}

bool contains_word(std::string_view text, const std::string& word) {
    std::size_t pos = 0;
    while ((pos = text.find(word, pos)) != npos) {
        const bool left = pos == 0 || !is_ident(text[pos - 1]);
        const bool right = pos + word.size() >= text.size() || !is_ident(text[pos + word.size()]);
        if (left && right) return true;
        pos += word.size();
    }
    return false;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

struct Function {
    std::string name;
    std::size_t begin = 0;        // offset of the keyword
    std::size_t header_end = 0;   // offset of '{' or ';'
    std::size_t body_open = npos;
    std::size_t body_close = npos;
    std::string modifiers;
    bool restricted = false;

    bool has_body() const { return body_open != npos; }
};

struct StateVar {
    std::string name;
    std::string type;
    std::size_t offset = 0;
};

struct Guard {
    std::size_t begin = 0;   // statement start
    std::size_t length = 0;  // through the closing parenthesis
    std::string condition;
    bool is_require = true;
    bool block_reverts = false;
};

struct Model {
    std::vector<Function> functions;
    std::map<std::string, StateVar> vars;
    std::set<std::string> restricting_modifiers;
    bool contract_found = false;
};

const std::regex& sender_check() {
    static const std::regex re(
        R"((msg\.sender|_msgSender\s*\(\s*\))\s*(==|!=)|(==|!=)\s*(msg\.sender|_msgSender\s*\(\s*\))|_checkOwner\s*\(|_checkRole\s*\(|hasRole\s*\()");
    return re;
}

std::size_t skip_ws(const std::string& s, std::size_t i) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    return i;
}

std::string read_word(const std::string& s, std::size_t i) {
    std::size_t j = i;
    while (j < s.size() && is_ident(s[j])) ++j;
    return s.substr(i, j - i);
}

std::size_t statement_end(const std::string& s, std::size_t i, std::size_t limit) {
    int depth = 0;
    for (; i < limit; ++i) {
        if (s[i] == '(' || s[i] == '[' || s[i] == '{') ++depth;
        else if (s[i] == ')' || s[i] == ']' || s[i] == '}') --depth;
        else if (s[i] == ';' && depth == 0) return i;
    }
    return npos;
}

void parse_state_var(const std::string& text, std::size_t offset, Model& m) {
    static const std::set<std::string> skip{"public", "private", "internal", "external", "constant",
                                            "immutable", "override", "payable", "memory", "storage"};
    std::string type;
    std::string rest;
    std::string_view t = trim_view(text);
    if (t.rfind("mapping", 0) == 0) {
        const std::string ts(t);
        const auto open = ts.find('(');
        if (open == npos) return;
        const auto close = match_close(ts, open);
        if (close == npos) return;
        type = ts.substr(0, close + 1);
        rest = ts.substr(close + 1);
    } else {
        const std::string ts(t);
        std::size_t j = 0;
        while (j < ts.size() && (is_ident(ts[j]) || ts[j] == '.' || ts[j] == '[' || ts[j] == ']')) ++j;
        type = ts.substr(0, j);
        rest = ts.substr(j);
    }
    const auto eq = rest.find('=');
    if (eq != npos) rest = rest.substr(0, eq);
    std::string name;
    std::size_t i = 0;
    while (i < rest.size()) {
        if (is_ident(rest[i])) {
            const std::string w = read_word(rest, i);
            if (!skip.count(w)) name = w;
            i += w.size();
        } else {
            ++i;
        }
    }
    if (name.empty() || type.empty()) return;
    std::string normalized;
    for (char c : type)
        if (!std::isspace(static_cast<unsigned char>(c))) normalized += c;
    m.vars.emplace(name, StateVar{name, normalized, offset});
}

void parse_contract_body(const std::string& s, std::size_t open, std::size_t close, Model& m) {
    std::size_t i = open + 1;
    std::map<std::string, std::string> modifier_bodies;
    while (true) {
        i = skip_ws(s, i);
        if (i >= close) break;
        if (!is_ident(s[i])) {
            ++i;
            continue;
        }
        const std::string word = read_word(s, i);
        if (word == "function" || word == "constructor" || word == "modifier" || word == "fallback" ||
            word == "receive") {
            Function f;
            f.begin = i;
            std::size_t j = i + word.size();
            if (word == "function" || word == "modifier") {
                j = skip_ws(s, j);
                f.name = read_word(s, j);
                j += f.name.size();
            } else {
                f.name = word;
            }
            const std::size_t paren = s.find('(', j);
            std::size_t after = j;
            if (paren != npos && paren < close && trim_view(std::string_view(s).substr(j, paren - j)).empty()) {
                const std::size_t pc = match_close(s, paren);
                if (pc == npos) break;
                after = pc + 1;
            }
            std::size_t k = after;
            int depth = 0;
            for (; k < close; ++k) {
                if (s[k] == '(') ++depth;
                else if (s[k] == ')') --depth;
                else if (depth == 0 && (s[k] == '{' || s[k] == ';')) break;
            }
            if (k >= close) break;
            f.header_end = k;
            f.modifiers = s.substr(after, k - after);
            if (s[k] == '{') {
                f.body_open = k;
                f.body_close = match_close(s, k);
                if (f.body_close == npos) break;
                i = f.body_close + 1;
            } else {
                i = k + 1;
            }
            if (word == "modifier") {
                if (f.has_body()) modifier_bodies[f.name] = s.substr(f.body_open, f.body_close - f.body_open);
            } else {
                m.functions.push_back(std::move(f));
            }
        } else if (word == "struct" || word == "enum") {
            const std::size_t b = s.find('{', i);
            if (b == npos || b >= close) break;
            const std::size_t e = match_close(s, b);
            if (e == npos) break;
            i = e + 1;
        } else if (word == "event" || word == "error" || word == "using" || word == "pragma" || word == "import" ||
                   word == "type") {
            const std::size_t e = statement_end(s, i, close);
            if (e == npos) break;
            i = e + 1;
        } else {
            const std::size_t e = statement_end(s, i, close);
            if (e == npos) break;
            parse_state_var(s.substr(i, e - i), i, m);
            i = e + 1;
        }
    }
    for (const auto& [name, body] : modifier_bodies)
        if (std::regex_search(body, sender_check())) m.restricting_modifiers.insert(name);
}

Model parse(const std::string& s) {
    Model m;
    static const std::regex head(R"(\b(contract|library)\s+[A-Za-z_$][\w$]*[^{;]*\{)");
    for (auto it = std::sregex_iterator(s.begin(), s.end(), head); it != std::sregex_iterator(); ++it) {
        const std::size_t open = static_cast<std::size_t>(it->position(0) + it->length(0) - 1);
        const std::size_t close = match_close(s, open);
        if (close == npos) continue;
        m.contract_found = true;
        parse_contract_body(s, open, close, m);
    }
    for (auto& f : m.functions) {
        bool restricted = false;
        for (std::size_t i = 0; i < f.modifiers.size();) {
            if (is_ident(f.modifiers[i])) {
                const std::string w = read_word(f.modifiers, i);
                if (m.restricting_modifiers.count(w) || (w.size() > 4 && w.rfind("only", 0) == 0)) restricted = true;
                i += w.size();
            } else {
                ++i;
            }
        }
        if (!restricted && f.has_body()) {
            const std::string body = s.substr(f.body_open, f.body_close - f.body_open);
            restricted = std::regex_search(body, sender_check());
        }
        f.restricted = restricted;
    }
    return m;
}

std::vector<const Function*> transfer_path(const Model& m, const std::string& s) {
    static const std::set<std::string> roots{"transfer",          "transferFrom",         "_transfer",
                                             "_tokenTransfer",    "_beforeTokenTransfer", "_afterTokenTransfer",
                                             "_update"};
    std::vector<const Function*> path;
    std::set<std::string> names;
    for (const auto& f : m.functions)
        if (f.has_body() && roots.count(f.name)) {
            path.push_back(&f);
            names.insert(f.name);
        }
    for (std::size_t i = 0; i < path.size(); ++i) {
        const std::string_view body(s.data() + path[i]->body_open, path[i]->body_close - path[i]->body_open);
        for (const auto& g : m.functions) {
            if (!g.has_body() || g.restricted || names.count(g.name) || g.name == "constructor") continue;
            if (body.find(g.name + "(") != npos || body.find(g.name + " (") != npos) {
                path.push_back(&g);
                names.insert(g.name);
            }
        }
    }
    return path;
}

std::vector<Guard> guards_in(const std::string& s, std::size_t from, std::size_t to) {
    std::vector<Guard> out;
    static const std::regex re(R"(\b(require|if)\s*\()");
    auto begin = std::sregex_iterator(s.begin() + static_cast<std::ptrdiff_t>(from),
                                      s.begin() + static_cast<std::ptrdiff_t>(to), re);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        const std::size_t start = from + static_cast<std::size_t>(it->position(0));
        const std::size_t open = start + static_cast<std::size_t>(it->length(0)) - 1;
        const std::size_t close = match_close(s, open);
        if (close == npos || close > to) continue;
        Guard g;
        g.begin = start;
        g.length = close + 1 - start;
        g.condition = s.substr(open + 1, close - open - 1);
        g.is_require = (*it)[1] == "require";
        if (!g.is_require) {
            std::size_t k = skip_ws(s, close + 1);
            std::string block;
            if (k < to && s[k] == '{') {
                const std::size_t e = match_close(s, k);
                if (e != npos) block = s.substr(k, e - k);
            } else {
                const std::size_t e = statement_end(s, k, to);
                if (e != npos) block = s.substr(k, e - k);
            }
            g.block_reverts = contains_word(block, "revert") || contains_word(block, "require") ||
                              contains_word(block, "throw");
        }
        out.push_back(std::move(g));
    }
    return out;
}

/// True when `body` assigns to `var`, directly or through (nested) indexing.
bool writes(const std::string& body, const std::string& var) {
    std::size_t pos = 0;
    while ((pos = body.find(var, pos)) != npos) {
        const std::size_t start = pos;
        pos += var.size();
        if ((start > 0 && (is_ident(body[start - 1]) || body[start - 1] == '.')) ||
            (pos < body.size() && is_ident(body[pos])))
            continue;
        std::size_t i = skip_ws(body, pos);
        while (i < body.size() && body[i] == '[') {
            const std::size_t close = match_close(body, i);
            if (close == npos) return false;
            i = skip_ws(body, close + 1);
        }
        if (i + 1 >= body.size()) continue;
        const char a = body[i], b = body[i + 1];
        if (a == '=' && b != '=') return true;
        if ((a == '+' || a == '-' || a == '*' || a == '/') && b == '=') return true;
        if ((a == '+' && b == '+') || (a == '-' && b == '-')) return true;
    }
    return false;
}

std::string body_of(const std::string& s, const Function& f) {
    return f.has_body() ? s.substr(f.body_open, f.body_close - f.body_open) : std::string();
}

bool is_uint(const std::string& type) { return type.rfind("uint", 0) == 0; }

class Scanner {
public:
    Scanner(std::string_view source, const ScanOptions& options) : src_(source), options_(options) {
        for (std::size_t i = 0; i < source.size(); ++i)
            if (source[i] == '\n') line_starts_.push_back(i + 1);
    }

    void add(TrapdoorKind kind, std::size_t offset, std::size_t length, std::string detail) {
        if (!options_.detectors.count(kind)) return;
        while (length > 0 && std::isspace(static_cast<unsigned char>(src_[offset + length - 1]))) --length;
        for (const auto& f : findings_)
            if (f.kind == kind && f.location.offset == offset) return;
        TrapdoorFinding f{kind, {line_of(offset), line_of(offset + (length ? length - 1 : 0)), offset, length},
                          std::string(src_.substr(offset, length)), std::move(detail)};
        findings_.push_back(std::move(f));
    }

    std::vector<TrapdoorFinding> take() {
        std::sort(findings_.begin(), findings_.end(), [](const auto& a, const auto& b) {
            return std::tie(a.location.offset, a.kind) < std::tie(b.location.offset, b.kind);
        });
        return std::move(findings_);
    }

private:
    std::size_t line_of(std::size_t offset) const {
        return static_cast<std::size_t>(std::upper_bound(line_starts_.begin(), line_starts_.end(), offset) -
                                        line_starts_.begin()) + 1;
    }

    std::string_view src_;
    const ScanOptions& options_;
    std::vector<std::size_t> line_starts_;
    std::vector<TrapdoorFinding> findings_;
};

bool name_matches(const std::string& name, const std::regex& re) { return std::regex_search(lower(name), re); }

void structured_scan(const std::string& s, const Model& m, Scanner& out) {
    const auto path = transfer_path(m, s);
    std::vector<std::string> restricted_bodies;
    for (const auto& f : m.functions)
        if (f.restricted && f.name != "constructor") restricted_bodies.push_back(body_of(s, f));
    const auto written_by_owner = [&](const std::string& var) {
        return std::any_of(restricted_bodies.begin(), restricted_bodies.end(),
                           [&](const std::string& b) { return writes(b, var); });
    };

    // owner_mint
    static const std::regex mint_name("mint");
    for (const auto& f : m.functions) {
        if (!f.restricted || f.name == "constructor" || !f.has_body()) continue;
        const std::string body = body_of(s, f);
        const bool mints = name_matches(f.name, mint_name) || body.find("_mint(") != npos ||
                           body.find("_mint (") != npos || writes(body, "_totalSupply") ||
                           writes(body, "totalSupply");
        if (mints) out.add(TrapdoorKind::owner_mint, f.begin, f.header_end - f.begin, "restricted function '" + f.name + "' creates tokens");
    }

    // mutable_fee
    static const std::regex fee_name("fee|tax");
    for (const auto& [name, var] : m.vars) {
        if (!is_uint(var.type) || !name_matches(name, fee_name)) continue;
        for (const auto& f : m.functions) {
            if (!f.restricted || f.name == "constructor" || !f.has_body()) continue;
            const std::string body = body_of(s, f);
            std::smatch match;
            const std::regex re("\\b" + name + R"(\s*(=(?!=)|\+=|-=|\*=|/=))");
            if (!std::regex_search(body, match, re)) continue;
            const std::size_t at = f.body_open + static_cast<std::size_t>(match.position(0));
            const std::size_t end = statement_end(s, at, f.body_close);
            out.add(TrapdoorKind::mutable_fee, at, (end == npos ? at : end + 1) - at,
                    "fee variable '" + name + "' is set by restricted function '" + f.name + "'");
        }
    }

    static const std::regex limit_name("max|limit");
    static const std::regex pair_like(R"((pair|uniswap|lp|amm|router))");
    static const std::regex sell_check(
        R"(\b(to|_to|recipient|dst|receiver|_recipient)\b\s*(==|!=)\s*[\w.()]*|[\w.()]*\s*(==|!=)\s*\b(to|_to|recipient|dst|receiver|_recipient)\b)");
    for (const Function* f : path) {
        for (const auto& g : guards_in(s, f->body_open, f->body_close)) {
            const bool reverting = g.is_require || g.block_reverts;
            if (!reverting) continue;
            for (const auto& [name, var] : m.vars) {
                if (!contains_word(g.condition, name)) continue;
                const bool owner_set = written_by_owner(name);
                // transfer_blocklist: address flag that forbids transfers.
                if (var.type == "mapping(address=>bool)" && owner_set) {
                    const std::regex negated("!\\s*" + name + R"(\s*\[|\b)" + name + R"(\s*\[[^\]]*\]\s*==\s*false)");
                    const bool blocks = g.is_require ? std::regex_search(g.condition, negated)
                                                     : !std::regex_search(g.condition, negated);
                    if (blocks)
                        out.add(TrapdoorKind::transfer_blocklist, g.begin, g.length,
                                "transfers check owner-managed list '" + name + "'");
                }
                if (var.type == "bool" && owner_set)
                    out.add(TrapdoorKind::pausable_transfer, g.begin, g.length,
                            "transfers depend on owner-controlled flag '" + name + "'");
                if (is_uint(var.type) && owner_set && name_matches(name, limit_name))
                    out.add(TrapdoorKind::max_tx_limit, g.begin, g.length,
                            "transfers capped by owner-controlled limit '" + name + "'");
            }
            // honeypot_sell_restriction: a reverting check that applies to sells into the pool.
            std::smatch sm;
            std::string cond = g.condition;
            bool sell_side = false;
            for (auto it = std::sregex_iterator(cond.begin(), cond.end(), sell_check); it != std::sregex_iterator();
                 ++it)
                if (std::regex_search(lower(it->str()), pair_like)) sell_side = true;
            if (sell_side)
                out.add(TrapdoorKind::honeypot_sell_restriction, g.begin, g.length,
                        "reverting check on transfers into the trading pair");
        }
        // whenNotPaused-style modifiers on the transfer path.
        if (contains_word(f->modifiers, "whenNotPaused")) {
            const std::size_t at = s.find("whenNotPaused", f->begin);
            const bool pausable = std::any_of(restricted_bodies.begin(), restricted_bodies.end(),
                                              [](const std::string& b) { return b.find("_pause") != npos; });
            if (pausable && at != npos && at < f->header_end)
                out.add(TrapdoorKind::pausable_transfer, at, std::string("whenNotPaused").size(),
                        "transfer function '" + f->name + "' can be paused by the owner");
        }
    }
}

void lexical_scan(const std::string& s, Scanner& out) {
    struct Rule {
        TrapdoorKind kind;
        std::regex re;
        const char* detail;
    };
    static const std::vector<Rule> rules = [] {
        const auto icase = std::regex::ECMAScript | std::regex::icase;
        std::vector<Rule> r;
        r.push_back({TrapdoorKind::owner_mint, std::regex(R"(function\s+\w*mint\w*\s*\([^)]*\)[^{;]*\bonly\w+)", icase),
                     "restricted mint function"});
        r.push_back({TrapdoorKind::mutable_fee,
                     std::regex(R"(function\s+\w*(fee|tax)\w*\s*\([^)]*\)[^{;]*\bonly\w+)", icase),
                     "restricted fee setter"});
        r.push_back({TrapdoorKind::transfer_blocklist,
                     std::regex(R"(require\s*\(\s*!\s*_?\w*(black|bot|block|ban|snip)\w*\s*\[)", icase),
                     "transfer check against an address list"});
        r.push_back({TrapdoorKind::pausable_transfer,
                     std::regex(R"(\bwhenNotPaused\b|require\s*\(\s*!?\s*_?(paused|tradingOpen|tradingEnabled)\b)", icase),
                     "transfers gated by a pause flag"});
        r.push_back({TrapdoorKind::max_tx_limit,
                     std::regex(R"(require\s*\([^;]*\b_?max\w*(tx|transaction|wallet)\w*)", icase),
                     "transfer size limit"});
        r.push_back({TrapdoorKind::honeypot_sell_restriction,
                     std::regex(R"(require\s*\([^;]*\b(to|recipient)\s*(==|!=)\s*\w*pair\w*)", icase),
                     "reverting check on transfers into the trading pair"});
        return r;
    }();
    std::size_t line_begin = 0;
    while (line_begin < s.size()) {
        std::size_t line_end = s.find('\n', line_begin);
        if (line_end == npos) line_end = s.size();
        const std::string line = s.substr(line_begin, line_end - line_begin);
        for (const auto& rule : rules) {
            std::smatch m;
            if (std::regex_search(line, m, rule.re))
                out.add(rule.kind, line_begin + static_cast<std::size_t>(m.position(0)),
                        static_cast<std::size_t>(m.length(0)), rule.detail);
        }
        line_begin = line_end + 1;
    }
}

}  // namespace

ScanResult scan_source(std::string_view source, bool verified, const ScanOptions& options) {
    ScanResult result;
    result.verified = verified;
    if (!verified)
        result.warnings.push_back({"unverified_source", "source is not verified; findings may not match deployed code", std::nullopt});
    if (trim_view(source).empty()) {
        result.warnings.push_back({"empty_source", "no source to scan", std::nullopt});
        return result;
    }
    const std::string clean = strip(source);
    Scanner scanner(source, options);
    Model model;
    const bool ok = balanced(clean);
    if (ok) model = parse(clean);
    if (!ok || !model.contract_found) {
        result.lexical_only = true;
        result.warnings.push_back({"lexical_only", "source could not be parsed; ran a line-based scan", std::nullopt});
        lexical_scan(clean, scanner);
    } else {
        structured_scan(clean, model, scanner);
    }
    result.findings = scanner.take();
    return result;
}

}  // namespace rugtrace::contractcheck
