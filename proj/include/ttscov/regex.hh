#pragma once

/// Regular expressions over expanded-diagram edges. A quotient path is
/// encoded as one such expression; after alternation removal it contains
/// only literals, concatenation and Kleene stars. Stars carry stable loop
/// ids; stars not nested inside another star are the outermost loops whose
/// iteration counts stay free in the final constraints.

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ttscov/errors.hh"
#include "ttscov/tts.hh"

namespace ttscov {

struct Regex;
using RegexPtr = std::shared_ptr<const Regex>;

struct Regex {
    enum class Kind { Epsilon, Literal, Concat, Star, Choice };

    Kind kind = Kind::Epsilon;
    Edge lit{};                   ///< Literal only
    std::vector<RegexPtr> kids;   ///< Concat/Choice children; Star body = kids[0]
    int loop_id = -1;             ///< Star only: stable identity
    bool outermost = false;       ///< Star only: not nested inside another star
};

/// Monotone counter handing out loop ids and, later, fresh ids for unwound
/// copies.
struct LoopIdGen {
    int next = 0;
    int fresh() { return next++; }
};

inline RegexPtr epsilon() {
    static const RegexPtr eps = std::make_shared<Regex>();
    return eps;
}

inline RegexPtr literal(const Edge& e) {
    auto r = std::make_shared<Regex>();
    r->kind = Regex::Kind::Literal;
    r->lit = e;
    return r;
}

inline bool is_epsilon(const RegexPtr& r) { return r && r->kind == Regex::Kind::Epsilon; }

inline size_t regex_nodes(const RegexPtr& r) {
    if (!r) return 0;
    size_t n = 1;
    for (const RegexPtr& k : r->kids) n += regex_nodes(k);
    return n;
}

/// Concatenation with flattening and epsilon elimination.
inline RegexPtr concat(std::vector<RegexPtr> parts) {
    std::vector<RegexPtr> flat;
    for (RegexPtr& p : parts) {
        if (!p || is_epsilon(p)) continue;
        if (p->kind == Regex::Kind::Concat)
            flat.insert(flat.end(), p->kids.begin(), p->kids.end());
        else
            flat.push_back(std::move(p));
    }
    if (flat.empty()) return epsilon();
    if (flat.size() == 1) return flat.front();
    auto r = std::make_shared<Regex>();
    r->kind = Regex::Kind::Concat;
    r->kids = std::move(flat);
    return r;
}

inline RegexPtr concat(RegexPtr a, RegexPtr b) { return concat(std::vector<RegexPtr>{a, b}); }

inline RegexPtr star(RegexPtr body, LoopIdGen& ids) {
    if (!body || is_epsilon(body)) return epsilon();
    if (body->kind == Regex::Kind::Star) return body;  // (r*)* = r*
    auto r = std::make_shared<Regex>();
    r->kind = Regex::Kind::Star;
    r->kids = {std::move(body)};
    r->loop_id = ids.fresh();
    return r;
}

inline std::string regex_to_string(const RegexPtr& r,
                                   const std::map<Edge, std::string>* names = nullptr);

/// Choice with flattening and structural deduplication.
inline RegexPtr choice(std::vector<RegexPtr> parts) {
    std::vector<RegexPtr> flat;
    std::set<std::string> seen;
    for (RegexPtr& p : parts) {
        if (!p) continue;
        if (p->kind == Regex::Kind::Choice) {
            for (const RegexPtr& k : p->kids)
                if (seen.insert(regex_to_string(k)).second) flat.push_back(k);
        } else if (seen.insert(regex_to_string(p)).second) {
            flat.push_back(std::move(p));
        }
    }
    if (flat.empty()) return nullptr;
    if (flat.size() == 1) return flat.front();
    auto r = std::make_shared<Regex>();
    r->kind = Regex::Kind::Choice;
    r->kids = std::move(flat);
    return r;
}

inline std::string regex_to_string(const RegexPtr& r, const std::map<Edge, std::string>* names) {
    if (!r) return "{}";
    std::ostringstream os;
    switch (r->kind) {
        case Regex::Kind::Epsilon:
            os << "eps";
            break;
        case Regex::Kind::Literal:
            if (names) {
                auto it = names->find(r->lit);
                os << (it != names->end() ? it->second : (std::ostringstream() << r->lit).str());
            } else {
                os << r->lit;
            }
            break;
        case Regex::Kind::Concat:
            for (size_t i = 0; i < r->kids.size(); ++i) {
                const RegexPtr& k = r->kids[i];
                bool paren = k->kind == Regex::Kind::Choice;
                os << (i ? " " : "") << (paren ? "(" : "") << regex_to_string(k, names)
                   << (paren ? ")" : "");
            }
            break;
        case Regex::Kind::Star:
            os << '(' << regex_to_string(r->kids[0], names) << ")*";
            break;
        case Regex::Kind::Choice:
            for (size_t i = 0; i < r->kids.size(); ++i)
                os << (i ? "|" : "") << regex_to_string(r->kids[i], names);
            break;
    }
    return os.str();
}

/// 0 for star-free, else 1 + deepest star nesting.
inline int nesting_height(const RegexPtr& r) {
    if (!r) return 0;
    int h = 0;
    for (const RegexPtr& k : r->kids) h = std::max(h, nesting_height(k));
    return r->kind == Regex::Kind::Star ? h + 1 : h;
}

inline bool is_star_free(const RegexPtr& r) { return nesting_height(r) == 0; }
inline bool is_loop_nest_free(const RegexPtr& r) { return nesting_height(r) <= 1; }

/// Recomputes the outermost flags: stars not nested inside another star.
inline RegexPtr mark_outermost(const RegexPtr& r, bool under_star = false) {
    if (!r) return r;
    auto out = std::make_shared<Regex>(*r);
    bool inner_under = under_star || r->kind == Regex::Kind::Star;
    out->kids.clear();
    for (const RegexPtr& k : r->kids) out->kids.push_back(mark_outermost(k, inner_under));
    if (r->kind == Regex::Kind::Star) out->outermost = !under_star;
    return out;
}

/// Collects the loop ids of the outermost stars, left to right.
inline void outermost_loops(const RegexPtr& r, std::vector<int>& out) {
    if (!r) return;
    if (r->kind == Regex::Kind::Star) {
        out.push_back(r->loop_id);
        return;  // everything below is nested
    }
    for (const RegexPtr& k : r->kids) outermost_loops(k, out);
}

/// Rewrites every choice away. Choices whose alternatives end up directly
/// under a star are folded by (R|T)* = (R* T*)*; remaining choices are
/// case-split, so the union of the returned languages equals the input
/// language. Each returned expression is alternation-free. The number of
/// case splits is capped by `budget`.
inline std::vector<RegexPtr> remove_alternation(const RegexPtr& r, LoopIdGen& ids,
                                                size_t budget = 4096) {
    if (!r) return {};
    switch (r->kind) {
        case Regex::Kind::Epsilon:
        case Regex::Kind::Literal:
            return {r};
        case Regex::Kind::Concat: {
            std::vector<std::vector<RegexPtr>> alts{{}};
            for (const RegexPtr& k : r->kids) {
                std::vector<RegexPtr> kalts = remove_alternation(k, ids, budget);
                std::vector<std::vector<RegexPtr>> next;
                for (const auto& prefix : alts)
                    for (const RegexPtr& ka : kalts) {
                        if (next.size() >= budget)
                            throw ResourceExceeded("alternation case-split budget exhausted");
                        auto row = prefix;
                        row.push_back(ka);
                        next.push_back(std::move(row));
                    }
                alts = std::move(next);
            }
            std::vector<RegexPtr> out;
            for (auto& row : alts) out.push_back(concat(std::move(row)));
            return out;
        }
        case Regex::Kind::Star: {
            std::vector<RegexPtr> body = remove_alternation(r->kids[0], ids, budget);
            if (body.size() == 1) {
                auto s = std::make_shared<Regex>(*r);
                s->kids = {body.front()};
                return {s};
            }
            // (r1 | ... | rk)* = (r1* ... rk*)*
            std::vector<RegexPtr> stars;
            for (RegexPtr& b : body) stars.push_back(star(std::move(b), ids));
            return {star(concat(std::move(stars)), ids)};
        }
        case Regex::Kind::Choice: {
            std::vector<RegexPtr> out;
            for (const RegexPtr& k : r->kids) {
                std::vector<RegexPtr> kalts = remove_alternation(k, ids, budget);
                if (out.size() + kalts.size() > budget)
                    throw ResourceExceeded("alternation case-split budget exhausted");
                out.insert(out.end(), kalts.begin(), kalts.end());
            }
            return out;
        }
    }
    return {};
}

/// A maximal run of literals or one top-level star.
struct Segment {
    enum class Kind { StraightLine, Loop };
    Kind kind = Kind::StraightLine;
    std::vector<Edge> edges;  ///< StraightLine
    RegexPtr loop;            ///< Loop: the star node
    int position = 0;         ///< index within the expression
};

/// Splits an alternation-free expression into straight-line and loop
/// segments; concatenating them in order reproduces the expression.
inline std::vector<Segment> segment(const RegexPtr& r) {
    std::vector<Segment> out;
    std::vector<RegexPtr> items;
    if (!r || is_epsilon(r)) return out;
    if (r->kind == Regex::Kind::Concat)
        items = r->kids;
    else
        items = {r};
    std::vector<Edge> run;
    auto flush = [&]() {
        if (run.empty()) return;
        Segment s;
        s.kind = Segment::Kind::StraightLine;
        s.edges = run;
        s.position = static_cast<int>(out.size());
        out.push_back(std::move(s));
        run.clear();
    };
    for (const RegexPtr& item : items) {
        if (item->kind == Regex::Kind::Literal) {
            run.push_back(item->lit);
        } else if (item->kind == Regex::Kind::Star) {
            flush();
            Segment s;
            s.kind = Segment::Kind::Loop;
            s.loop = item;
            s.position = static_cast<int>(out.size());
            out.push_back(std::move(s));
        } else if (item->kind == Regex::Kind::Epsilon) {
            continue;
        } else {
            throw InternalInconsistency("segment() requires an alternation-free expression");
        }
    }
    flush();
    return out;
}

/// Iteration counts for the outermost loops, keyed by loop id.
using KappaAssignment = std::map<int, long long>;

namespace detail {

/// Deep copy with fresh ids on every star; used when an unwound copy
/// exposes the loops of a body multiple times.
inline RegexPtr refresh_loop_ids(const RegexPtr& r, LoopIdGen& ids) {
    if (!r) return r;
    auto out = std::make_shared<Regex>(*r);
    out->kids.clear();
    for (const RegexPtr& k : r->kids) out->kids.push_back(refresh_loop_ids(k, ids));
    if (out->kind == Regex::Kind::Star) out->loop_id = ids.fresh();
    return out;
}

}  // namespace detail

/// Replaces every outermost star by the assigned number of body copies.
/// Stars inside those copies get fresh ids and become outermost in the
/// result; the nesting height strictly decreases whenever a nest exists.
inline RegexPtr unwind(const RegexPtr& r, const KappaAssignment& kappa, LoopIdGen& ids,
                       size_t node_budget = 100000) {
    if (!r) return r;
    if (r->kind == Regex::Kind::Star) {
        auto it = kappa.find(r->loop_id);
        if (it == kappa.end())
            throw InternalInconsistency("unwind: no iteration count for an outermost loop");
        std::vector<RegexPtr> copies;
        size_t body_nodes = regex_nodes(r->kids[0]);
        if (it->second > 0 && body_nodes * static_cast<size_t>(it->second) > node_budget)
            throw ResourceExceeded("unwound expression exceeds the node budget");
        for (long long i = 0; i < it->second; ++i)
            copies.push_back(detail::refresh_loop_ids(r->kids[0], ids));
        return mark_outermost(concat(std::move(copies)));
    }
    if (r->kids.empty()) return r;
    std::vector<RegexPtr> kids;
    size_t total = 0;
    for (const RegexPtr& k : r->kids) {
        RegexPtr nk = unwind(k, kappa, ids, node_budget);
        total += regex_nodes(nk);
        if (total > node_budget) throw ResourceExceeded("unwound expression exceeds the node budget");
        kids.push_back(std::move(nk));
    }
    auto out = std::make_shared<Regex>(*r);
    out->kids.clear();
    RegexPtr joined = r->kind == Regex::Kind::Concat ? concat(std::move(kids)) : choice(std::move(kids));
    return mark_outermost(joined);
}

/// The edge word of a star-free expression.
inline std::vector<Edge> flatten_literals(const RegexPtr& r) {
    std::vector<Edge> out;
    if (!r) return out;
    if (r->kind == Regex::Kind::Literal) {
        out.push_back(r->lit);
    } else if (r->kind == Regex::Kind::Concat) {
        for (const RegexPtr& k : r->kids) {
            auto sub = flatten_literals(k);
            out.insert(out.end(), sub.begin(), sub.end());
        }
    } else if (r->kind != Regex::Kind::Epsilon) {
        throw InternalInconsistency("expression is not a literal word");
    }
    return out;
}

/// All words of length <= maxlen; test-sized inputs only.
inline std::set<std::vector<Edge>> language_upto(const RegexPtr& r, size_t maxlen,
                                                 size_t word_cap = 200000) {
    std::set<std::vector<Edge>> out;
    if (!r) return out;
    switch (r->kind) {
        case Regex::Kind::Epsilon:
            out.insert({});
            break;
        case Regex::Kind::Literal:
            if (maxlen >= 1) out.insert({r->lit});
            break;
        case Regex::Kind::Choice:
            for (const RegexPtr& k : r->kids)
                for (auto& w : language_upto(k, maxlen, word_cap)) out.insert(w);
            break;
        case Regex::Kind::Concat: {
            std::set<std::vector<Edge>> acc{{}};
            for (const RegexPtr& k : r->kids) {
                std::set<std::vector<Edge>> next;
                auto kw = language_upto(k, maxlen, word_cap);
                for (const auto& a : acc)
                    for (const auto& b : kw) {
                        if (a.size() + b.size() > maxlen) continue;
                        auto w = a;
                        w.insert(w.end(), b.begin(), b.end());
                        next.insert(std::move(w));
                        if (next.size() > word_cap)
                            throw ResourceExceeded("language enumeration cap");
                    }
                acc = std::move(next);
                if (acc.empty()) break;
            }
            out = std::move(acc);
            break;
        }
        case Regex::Kind::Star: {
            std::set<std::vector<Edge>> acc{{}};
            auto kw = language_upto(r->kids[0], maxlen, word_cap);
            bool grew = true;
            while (grew) {
                grew = false;
                std::set<std::vector<Edge>> next = acc;
                for (const auto& a : acc)
                    for (const auto& b : kw) {
                        if (b.empty() || a.size() + b.size() > maxlen) continue;
                        auto w = a;
                        w.insert(w.end(), b.begin(), b.end());
                        if (next.insert(std::move(w)).second) grew = true;
                        if (next.size() > word_cap)
                            throw ResourceExceeded("language enumeration cap");
                    }
                acc = std::move(next);
            }
            out = std::move(acc);
            break;
        }
    }
    return out;
}

}  // namespace ttscov
