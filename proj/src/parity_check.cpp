#include "bpc/parity_check.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

#include "bpc/rng.hpp"

namespace bpc {

ParityCheck make_parity_check(BitMatrix h) {
    const int n = h.cols(), m = h.rows();
    if (m < 1 || n - m < 1 || n - m >= n)
        throw InvalidParams("parity check needs 0 < k < n");
    return ParityCheck{std::move(h)};
}

std::vector<int> zero_columns(const ParityCheck& code) {
    std::vector<int> out;
    for (int c = 0; c < code.n(); ++c) {
        bool any = false;
        for (int r = 0; r < code.h.rows() && !any; ++r) any = code.h(r, c);
        if (!any) out.push_back(c);
    }
    return out;
}

namespace {

std::vector<long long> tokenize_ints(const std::string& text) {
    std::vector<long long> toks;
    std::istringstream in(text);
    std::string word;
    while (in >> word) {
        try {
            std::size_t used = 0;
            long long v = std::stoll(word, &used);
            if (used != word.size()) throw ParseError("non-integer token: " + word);
            toks.push_back(v);
        } catch (const ParseError&) {
            throw;
        } catch (...) {
            throw ParseError("non-integer token: " + word);
        }
    }
    return toks;
}

ParityCheck parse_dense(const std::vector<long long>& t, int n, int m) {
    BitMatrix h(m, n);
    std::size_t idx = 2;
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < n; ++c) h.set(r, c, t[idx++] != 0);
    return make_parity_check(std::move(h));
}

ParityCheck parse_alist(const std::vector<long long>& t, int n, int m) {
    std::size_t idx = 2;
    auto next = [&](const char* what) {
        if (idx >= t.size()) throw ParseError(std::string("alist truncated in ") + what);
        return t[idx++];
    };

    const long long max_col = next("max degrees");
    const long long max_row = next("max degrees");
    if (max_col < 0 || max_col > m || max_row < 0 || max_row > n)
        throw ParseError("alist max degrees out of range");

    std::vector<int> col_deg(n), row_deg(m);
    for (int c = 0; c < n; ++c) {
        const long long d = next("column degrees");
        if (d < 0 || d > max_col) throw ParseError("column degree out of range");
        col_deg[c] = static_cast<int>(d);
    }
    for (int r = 0; r < m; ++r) {
        const long long d = next("row degrees");
        if (d < 0 || d > max_row) throw ParseError("row degree out of range");
        row_deg[r] = static_cast<int>(d);
    }

    BitMatrix h(m, n);
    // Column adjacency defines the matrix; entries of 0 are padding.
    for (int c = 0; c < n; ++c) {
        int seen = 0;
        const std::size_t remaining_cols = static_cast<std::size_t>(n - 1 - c);
        // Padded variants list max_col entries per column; unpadded list
        // col_deg[c]. Detect per column by reading col_deg entries, then
        // consuming zero padding if the file carries it.
        for (int j = 0; j < col_deg[c]; ++j) {
            const long long v = next("column adjacency");
            if (v < 1 || v > m) throw ParseError("column adjacency index out of range");
            h.set(static_cast<int>(v - 1), c, 1);
            ++seen;
        }
        (void)remaining_cols;
        while (idx < t.size() && t[idx] == 0 && seen < max_col) {
            ++idx;
            ++seen;
        }
    }
    // Row adjacency: cross-check against the matrix built from columns.
    for (int r = 0; r < m; ++r) {
        int seen = 0;
        for (int j = 0; j < row_deg[r]; ++j) {
            const long long v = next("row adjacency");
            if (v < 1 || v > n) throw ParseError("row adjacency index out of range");
            if (!h(r, static_cast<int>(v - 1)))
                throw ParseError("row adjacency disagrees with column adjacency");
            ++seen;
        }
        while (idx < t.size() && t[idx] == 0 && seen < max_row) {
            ++idx;
            ++seen;
        }
    }
    for (int r = 0; r < m; ++r) {
        int d = 0;
        for (int c = 0; c < n; ++c) d += h(r, c);
        if (d != row_deg[r]) throw ParseError("row degree list disagrees with adjacency");
    }
    return make_parity_check(std::move(h));
}

} // namespace

ParityCheck load_alist(const std::string& text) {
    const auto t = tokenize_ints(text);
    if (t.size() < 2) throw ParseError("missing header");
    const long long n = t[0], m = t[1];
    if (n < 2 || m < 1 || m >= n) throw ParseError("bad header dimensions");

    // Dense detection: exactly n*m entries after the header, all 0/1.
    const std::size_t dense_count = 2 + static_cast<std::size_t>(n) * static_cast<std::size_t>(m);
    if (t.size() == dense_count) {
        bool binary = true;
        for (std::size_t i = 2; i < t.size() && binary; ++i)
            binary = (t[i] == 0 || t[i] == 1);
        if (binary) return parse_dense(t, static_cast<int>(n), static_cast<int>(m));
    }
    return parse_alist(t, static_cast<int>(n), static_cast<int>(m));
}

std::string save_alist(const ParityCheck& code) {
    const BitMatrix& h = code.h;
    const int n = h.cols(), m = h.rows();
    std::vector<std::vector<int>> cols(n), rows(m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < n; ++c)
            if (h(r, c)) {
                cols[c].push_back(r + 1);
                rows[r].push_back(c + 1);
            }
    int max_col = 0, max_row = 0;
    for (auto& v : cols) max_col = std::max<int>(max_col, v.size());
    for (auto& v : rows) max_row = std::max<int>(max_row, v.size());

    std::ostringstream out;
    out << n << ' ' << m << '\n' << max_col << ' ' << max_row << '\n';
    for (int c = 0; c < n; ++c) out << cols[c].size() << (c + 1 < n ? ' ' : '\n');
    for (int r = 0; r < m; ++r) out << rows[r].size() << (r + 1 < m ? ' ' : '\n');
    auto emit = [&out](const std::vector<int>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out << ' ';
            out << v[i];
        }
        out << '\n';
    };
    for (auto& v : cols) emit(v);
    for (auto& v : rows) emit(v);
    return out.str();
}

ParityCheck random_systematic(int n, int k, double p, std::uint64_t seed) {
    if (k < 1 || k >= n) throw InvalidParams("random_systematic needs 0 < k < n");
    if (p < 0.0 || p > 1.0) throw InvalidParams("Bernoulli rate must be in [0,1]");
    const int m = n - k;
    BitMatrix h(m, n);
    for (int r = 0; r < m; ++r) h.set(r, r, 1);
    Rng rng(seed, stream::kCodeInit, 0);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < k; ++c) h.set(r, m + c, rng.bernoulli(p));
    return ParityCheck{std::move(h)};
}

namespace {

// Shortest cycle through edge (check j, var c): BFS from var to check in
// the bipartite graph with that edge removed. Vertices 0..n-1 are
// variables, n..n+m-1 are checks.
int shortest_cycle_through(const std::vector<std::vector<int>>& adj, int n, int var, int chk,
                           int depth_cap) {
    const int V = static_cast<int>(adj.size());
    std::vector<int> dist(V, -1);
    std::deque<int> queue;
    dist[var] = 0;
    queue.push_back(var);
    while (!queue.empty()) {
        const int u = queue.front();
        queue.pop_front();
        if (dist[u] >= depth_cap) break;
        for (int w : adj[u]) {
            if (u == var && w == chk) continue; // removed edge
            if (u == chk && w == var) continue;
            if (dist[w] < 0) {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    return dist[chk] < 0 ? -1 : dist[chk] + 1;
}

} // namespace

CodeStats stats(const ParityCheck& code) {
    const BitMatrix& h = code.h;
    const int n = h.cols(), m = h.rows();
    CodeStats s;
    s.row_degrees.assign(m, 0);
    s.col_degrees.assign(n, 0);
    long long ones = 0;
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < n; ++c)
            if (h(r, c)) {
                ++s.row_degrees[r];
                ++s.col_degrees[c];
                ++ones;
            }
    s.density = static_cast<double>(ones) / (static_cast<double>(n) * m);
    s.girth_cap = 2 * std::min(n, m);

    // Acyclicity is decided exactly by union-find; the per-edge BFS then
    // only has to find a shortest cycle, cut off at the cap.
    std::vector<int> parent(n + m);
    for (int i = 0; i < n + m; ++i) parent[i] = i;
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    bool has_cycle = false;
    std::vector<std::vector<int>> adj(n + m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < n; ++c)
            if (h(r, c)) {
                adj[c].push_back(n + r);
                adj[n + r].push_back(c);
                const int a = find(c), b = find(n + r);
                if (a == b)
                    has_cycle = true;
                else
                    parent[a] = b;
            }
    if (!has_cycle) {
        s.girth_kind = GirthKind::Acyclic;
        return s;
    }

    int best = -1;
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < n; ++c) {
            if (!h(r, c)) continue;
            const int cap = (best > 0 ? std::min(best, s.girth_cap) : s.girth_cap) - 1;
            const int len = shortest_cycle_through(adj, n, c, n + r, cap);
            if (len > 0 && (best < 0 || len < best)) best = len;
        }
    }
    if (best < 0) {
        s.girth_kind = GirthKind::AtLeastCap;
        s.girth = s.girth_cap;
    } else {
        s.girth_kind = GirthKind::Finite;
        s.girth = best;
    }
    return s;
}

double sparsity_delta(const ParityCheck& base, const ParityCheck& learned) {
    if (base.h.rows() != learned.h.rows() || base.h.cols() != learned.h.cols())
        throw DimensionMismatch("sparsity_delta needs equal shapes");
    const double sb = static_cast<double>(base.h.ones());
    const double so = static_cast<double>(learned.h.ones());
    if (sb == 0.0) throw InvalidParams("base matrix has no ones");
    return 100.0 * (sb - so) / sb;
}

ParityCheck load_code_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open code file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_alist(buf.str());
}

void save_code_file(const ParityCheck& code, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write code file: " + path);
    out << save_alist(code);
}

std::uint64_t code_fingerprint(const ParityCheck& code) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    auto feed = [&hash](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            hash ^= (v >> (8 * i)) & 0xff;
            hash *= 0x100000001b3ULL;
        }
    };
    feed(static_cast<std::uint64_t>(code.h.rows()));
    feed(static_cast<std::uint64_t>(code.h.cols()));
    std::uint64_t word = 0;
    int fill = 0;
    for (auto b : code.h.raw()) {
        word = (word << 1) | b;
        if (++fill == 64) {
            feed(word);
            word = 0;
            fill = 0;
        }
    }
    if (fill) feed(word);
    return hash;
}

} // namespace bpc
