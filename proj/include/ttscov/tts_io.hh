#pragma once

/// Text format for diagrams, a deterministic random-instance generator, and
/// the run configuration shared by the command-line driver.
///
/// Format, line by line (LF endings, '#' starts a comment, blanks ignored):
///   <|S|> <|L|>
///   <s> <l> -> <s'> <l'>          one line per edge, single spaces
///   init <s> <l>                  optional, repeatable; several init lines
///                                 are folded into one fresh initial state
///   target <s> <l>                optional

#include <cctype>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ttscov/rng.hh"
#include "ttscov/tts.hh"

namespace ttscov {

enum class Mode { Symbolic, Bws, Compare };

/// Options of one coverability query.
struct RunConfig {
    Mode mode = Mode::Symbolic;
    std::optional<ThreadState> target_override;
    std::optional<ThreadState> initial_override;
    int max_paths = 4096;       ///< quotient-path/case-split budget
    int max_models = 16;        ///< iterator models tried per quotient path
    int max_regex_nodes = 100000;
    int max_disjuncts = 4096;
    bool prune = true;
    uint64_t seed = 0;
    std::string emit_smt_dir;   ///< empty: no export
    bool witness = false;
};

namespace detail {

inline bool parse_int(std::istringstream& in, int& out) {
    return static_cast<bool>(in >> out);
}

}  // namespace detail

/// Parses a diagram document. Initial defaults to (0,0); multiple init lines
/// are normalized into a unique fresh initial state. The target defaults to
/// (0,0) unless a `target` directive is present (the driver usually overrides
/// it from the command line).
inline Ttd parse_tts(const std::string& text) {
    Ttd ttd;
    bool have_header = false;
    std::vector<ThreadState> inits;
    std::optional<ThreadState> target;

    int lineno = 0;
    std::istringstream stream(text);
    std::string raw;
    while (std::getline(stream, raw)) {
        ++lineno;
        if (auto pos = raw.find('#'); pos != std::string::npos) raw.erase(pos);
        std::string line;
        for (char c : raw)
            if (!std::isspace(static_cast<unsigned char>(c)) || !line.empty()) line += c;
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
        if (line.empty()) continue;

        std::istringstream in(line);
        if (!have_header) {
            if (!detail::parse_int(in, ttd.num_shared) || !detail::parse_int(in, ttd.num_local))
                throw ParseError(lineno, "expected '<|S|> <|L|>' header");
            if (ttd.num_shared <= 0 || ttd.num_local <= 0)
                throw RangeError(lineno, "state counts must be positive");
            have_header = true;
            continue;
        }

        std::string word;
        in >> word;
        auto read_state = [&](const char* what) {
            ThreadState t;
            if (!detail::parse_int(in, t.shared) || !detail::parse_int(in, t.local))
                throw ParseError(lineno, std::string("expected '<s> <l>' after ") + what);
            if (!ttd.in_range(t)) throw RangeError(lineno, "state index out of range");
            return t;
        };
        if (word == "init") {
            inits.push_back(read_state("init"));
        } else if (word == "target") {
            target = read_state("target");
        } else {
            // edge line: "<s> <l> -> <s'> <l'>"
            Edge e;
            std::istringstream ein(line);
            std::string arrow;
            if (!detail::parse_int(ein, e.src.shared) || !detail::parse_int(ein, e.src.local) ||
                !(ein >> arrow) || arrow != "->" ||
                !detail::parse_int(ein, e.dst.shared) || !detail::parse_int(ein, e.dst.local))
                throw ParseError(lineno, "expected edge '<s> <l> -> <s'> <l'>'");
            std::string tail;
            if (ein >> tail) throw ParseError(lineno, "trailing tokens after edge");
            if (!ttd.in_range(e.src) || !ttd.in_range(e.dst))
                throw RangeError(lineno, "edge endpoint out of range");
            ttd.edges.push_back(e);
        }
    }
    if (!have_header) throw ParseError(lineno ? lineno : 1, "missing header");

    ttd.normalize_edges();
    if (inits.size() == 1) {
        ttd.initial = inits.front();
    } else if (inits.size() > 1) {
        if (target) {
            ThreadState t = *target;
            ttd = normalize_initial(ttd, std::set<ThreadState>(inits.begin(), inits.end()));
            ttd.target = t;
            return ttd;
        }
        ttd = normalize_initial(ttd, std::set<ThreadState>(inits.begin(), inits.end()));
        return ttd;
    }
    if (target) ttd.target = *target;
    return ttd;
}

/// Canonical document: header, sorted edges, then non-default directives.
inline std::string emit_tts(const Ttd& ttd) {
    std::ostringstream out;
    out << ttd.num_shared << ' ' << ttd.num_local << '\n';
    Ttd sorted = ttd;
    sorted.normalize_edges();
    for (const Edge& e : sorted.edges)
        out << e.src.shared << ' ' << e.src.local << " -> " << e.dst.shared << ' ' << e.dst.local
            << '\n';
    if (!(ttd.initial == ThreadState{0, 0}))
        out << "init " << ttd.initial.shared << ' ' << ttd.initial.local << '\n';
    out << "target " << ttd.target.shared << ' ' << ttd.target.local << '\n';
    return out.str();
}

/// Deterministic random diagram: `num_edges` distinct non-self-loop edges,
/// initial (0,0), target sampled different from the initial state.
inline Ttd generate_random_ttd(uint64_t seed, int num_shared, int num_local, int num_edges) {
    if (num_shared <= 0 || num_local <= 0 || num_edges < 0)
        throw InfeasibleShape("bounds must be positive");
    const long long states = static_cast<long long>(num_shared) * num_local;
    const long long pairs = states * (states - 1);  // ordered, no self-loops
    if (num_edges > pairs) throw InfeasibleShape("more edges requested than distinct pairs exist");

    Rng rng(seed);
    Ttd ttd;
    ttd.num_shared = num_shared;
    ttd.num_local = num_local;
    ttd.initial = ThreadState{0, 0};

    auto nth_state = [&](long long i) {
        return ThreadState{static_cast<int>(i / num_local), static_cast<int>(i % num_local)};
    };
    std::set<Edge> chosen;
    while (static_cast<int>(chosen.size()) < num_edges) {
        long long a = static_cast<long long>(rng.below(static_cast<uint64_t>(states)));
        long long b = static_cast<long long>(rng.below(static_cast<uint64_t>(states)));
        if (a == b) continue;
        chosen.insert(Edge{nth_state(a), nth_state(b)});
    }
    ttd.edges.assign(chosen.begin(), chosen.end());

    if (states < 2) throw InfeasibleShape("need a target distinct from the initial state");
    long long t;
    do {
        t = static_cast<long long>(rng.below(static_cast<uint64_t>(states)));
    } while (nth_state(t) == ttd.initial);
    ttd.target = nth_state(t);
    return ttd;
}

}  // namespace ttscov
