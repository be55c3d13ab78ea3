#ifndef DSRL_NETWORK_HPP
#define DSRL_NETWORK_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsrl/errors.hpp"
#include "dsrl/point.hpp"
#include "dsrl/random.hpp"

namespace dsrl {

/// How generate_network searches for a layout meeting the constraints.
enum class Placement {
    /// Redraw the whole layout until it is valid. Exact conditional law, but
    /// hopeless when valid layouts are rare (the 31-node deployment is one).
    rejection,
    /// Redraw only the offending sensors (degree out of bounds, or outside the
    /// largest component) until the layout is valid.
    local_resampling,
};

inline const char* to_string(Placement p)
{
    return p == Placement::rejection ? "rejection" : "local_resampling";
}

inline Placement placement_from_string(const std::string& s)
{
    if (s == "rejection") return Placement::rejection;
    if (s == "local_resampling") return Placement::local_resampling;
    throw ConfigInvalid("network.placement", "unknown placement '" + s + "'");
}

/// Parameters of the random geometric deployment. Sensors are uniform in the
/// cube [-half_width, half_width]^dimension and linked when closer than
/// connect_radius.
struct NetworkParams {
    std::size_t num_sensors = 31;
    std::size_t dimension = 3;
    double half_width = 3.0;
    double connect_radius = 1.75;
    std::size_t min_degree = 2;
    std::size_t max_degree = 10;
    std::size_t max_attempts = 1'000'000;
    Placement placement = Placement::local_resampling;

    void validate() const
    {
        if (num_sensors < 2) throw ConfigInvalid("network.num_sensors", "must be at least 2");
        if (dimension < 1) throw ConfigInvalid("network.dimension", "must be at least 1");
        if (!(half_width >= 0.0)) throw ConfigInvalid("network.half_width", "must be nonnegative");
        if (!(connect_radius > 0.0)) throw ConfigInvalid("network.connect_radius", "must be positive");
        if (min_degree > max_degree) throw ConfigInvalid("network.min_degree", "exceeds max_degree");
        if (max_attempts < 1) throw ConfigInvalid("network.max_attempts", "must be at least 1");
    }

    friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

/// How a network was produced; kept so a serialized run can be regenerated.
struct NetworkOrigin {
    NetworkParams params;
    std::uint64_t seed = 0;
    std::size_t attempts = 0;
};

/// Sensor positions plus an undirected, loop-free adjacency relation.
/// Nodes are indexed 0..size()-1. Immutable once built.
class SensorNetwork {
public:
    using Edge = std::pair<std::size_t, std::size_t>;

    SensorNetwork(std::vector<PointN> positions, const std::vector<Edge>& edges)
        : positions_(std::move(positions)), neighbors_(positions_.size())
    {
        if (positions_.empty()) throw SizeMismatch("network needs at least one sensor");
        dimension_ = dsrl::dim(positions_.front());
        if (dimension_ == 0) throw DimensionMismatch("sensor positions must have dimension >= 1");
        for (const auto& p : positions_) {
            require_dim(p, dimension_, "sensor position");
            if (!is_finite(p)) throw Error("sensor position is not finite");
        }
        for (auto [i, j] : edges) {
            if (i >= size() || j >= size()) throw IndexOutOfRange("edge endpoint out of range");
            if (i == j) throw Error("self-loop at node " + std::to_string(i));
            neighbors_[i].push_back(j);
            neighbors_[j].push_back(i);
        }
        for (auto& n : neighbors_) {
            std::sort(n.begin(), n.end());
            n.erase(std::unique(n.begin(), n.end()), n.end());
        }
    }

    /// Distance graph: i ~ j iff ||a_i - a_j|| < radius (strict).
    static SensorNetwork from_positions(std::vector<PointN> positions, double radius)
    {
        std::vector<Edge> edges;
        for (std::size_t i = 0; i < positions.size(); ++i)
            for (std::size_t j = i + 1; j < positions.size(); ++j)
                if ((positions[i] - positions[j]).norm() < radius) edges.emplace_back(i, j);
        return SensorNetwork(std::move(positions), edges);
    }

    std::size_t size() const noexcept { return positions_.size(); }
    std::size_t dimension() const noexcept { return dimension_; }

    const std::vector<PointN>& positions() const noexcept { return positions_; }

    const PointN& position(std::size_t i) const
    {
        check_index(i);
        return positions_[i];
    }

    /// N_i, sorted ascending. Never contains i.
    const std::vector<std::size_t>& neighbors(std::size_t i) const
    {
        check_index(i);
        return neighbors_[i];
    }

    std::size_t degree(std::size_t i) const { return neighbors(i).size(); }

    std::size_t max_degree() const noexcept
    {
        std::size_t d = 0;
        for (const auto& n : neighbors_) d = std::max(d, n.size());
        return d;
    }

    std::size_t min_degree() const noexcept
    {
        std::size_t d = neighbors_.front().size();
        for (const auto& n : neighbors_) d = std::min(d, n.size());
        return d;
    }

    bool adjacent(std::size_t i, std::size_t j) const
    {
        const auto& n = neighbors(i);
        return std::binary_search(n.begin(), n.end(), j);
    }

    /// Edge list with i < j, in lexicographic order.
    std::vector<Edge> edges() const
    {
        std::vector<Edge> out;
        for (std::size_t i = 0; i < size(); ++i)
            for (std::size_t j : neighbors_[i])
                if (i < j) out.emplace_back(i, j);
        return out;
    }

    const std::optional<NetworkOrigin>& origin() const noexcept { return origin_; }
    void set_origin(NetworkOrigin o) { origin_ = o; }

private:
    void check_index(std::size_t i) const
    {
        if (i >= size())
            throw IndexOutOfRange("node " + std::to_string(i) + " out of range [0, " + std::to_string(size()) + ")");
    }

    std::vector<PointN> positions_;
    std::vector<std::vector<std::size_t>> neighbors_;
    std::size_t dimension_ = 0;
    std::optional<NetworkOrigin> origin_;
};

inline const std::vector<std::size_t>& neighbors(const SensorNetwork& net, std::size_t i)
{
    return net.neighbors(i);
}

/// True iff every node is reachable from node 0.
inline bool is_connected(const SensorNetwork& net)
{
    std::vector<char> seen(net.size(), 0);
    std::queue<std::size_t> frontier;
    frontier.push(0);
    seen[0] = 1;
    std::size_t reached = 1;
    while (!frontier.empty()) {
        std::size_t u = frontier.front();
        frontier.pop();
        for (std::size_t v : net.neighbors(u)) {
            if (!seen[v]) {
                seen[v] = 1;
                ++reached;
                frontier.push(v);
            }
        }
    }
    return reached == net.size();
}

inline bool satisfies_degree_bounds(const SensorNetwork& net, std::size_t min_deg, std::size_t max_deg)
{
    for (std::size_t i = 0; i < net.size(); ++i) {
        std::size_t d = net.degree(i);
        if (d < min_deg || d > max_deg) return false;
    }
    return true;
}

namespace detail {

/// Sensors that must move for the layout to become valid: those whose degree
/// is out of bounds, or, when all degrees are fine, those outside the largest
/// connected component.
inline std::vector<std::size_t> offending_nodes(const SensorNetwork& net, std::size_t min_deg, std::size_t max_deg)
{
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < net.size(); ++i) {
        std::size_t d = net.degree(i);
        if (d < min_deg || d > max_deg) bad.push_back(i);
    }
    if (!bad.empty()) return bad;

    std::vector<std::size_t> label(net.size(), net.size());
    std::vector<std::size_t> comp_size;
    for (std::size_t s = 0; s < net.size(); ++s) {
        if (label[s] != net.size()) continue;
        const std::size_t id = comp_size.size();
        comp_size.push_back(0);
        std::queue<std::size_t> q;
        q.push(s);
        label[s] = id;
        while (!q.empty()) {
            std::size_t u = q.front();
            q.pop();
            ++comp_size[id];
            for (std::size_t v : net.neighbors(u))
                if (label[v] == net.size()) {
                    label[v] = id;
                    q.push(v);
                }
        }
    }
    if (comp_size.size() == 1) return bad;
    const auto largest = static_cast<std::size_t>(
        std::max_element(comp_size.begin(), comp_size.end()) - comp_size.begin());
    for (std::size_t i = 0; i < net.size(); ++i)
        if (label[i] != largest) bad.push_back(i);
    return bad;
}

inline void draw_position(PointN& p, double half_width, RandomStream& rng)
{
    for (Eigen::Index c = 0; c < p.size(); ++c) p[c] = rng.uniform(-half_width, half_width);
}

} // namespace detail

/// Samples sensor positions until the distance graph is connected and every
/// degree lies in [min_degree, max_degree]. Edges are never pruned or added:
/// adjacency is always the distance graph of the returned positions.
/// max_attempts bounds the number of layouts examined.
inline SensorNetwork generate_network(const NetworkParams& params, std::uint64_t seed)
{
    params.validate();
    RandomStream rng(seed);
    const auto n = static_cast<Eigen::Index>(params.dimension);
    std::vector<PointN> positions(params.num_sensors, PointN(n));
    for (auto& p : positions) detail::draw_position(p, params.half_width, rng);

    for (std::size_t attempt = 1; attempt <= params.max_attempts; ++attempt) {
        auto net = SensorNetwork::from_positions(positions, params.connect_radius);
        const auto bad = detail::offending_nodes(net, params.min_degree, params.max_degree);
        if (bad.empty()) {
            net.set_origin({params, seed, attempt});
            return net;
        }
        if (params.placement == Placement::rejection) {
            for (auto& p : positions) detail::draw_position(p, params.half_width, rng);
        } else {
            for (std::size_t i : bad) detail::draw_position(positions[i], params.half_width, rng);
        }
    }
    throw GenerationExhausted("no valid network after " + std::to_string(params.max_attempts) + " attempts");
}

// --- serialization --------------------------------------------------------

inline void to_json(nlohmann::json& j, const NetworkParams& p)
{
    j = nlohmann::json{{"num_sensors", p.num_sensors},   {"dimension", p.dimension},
                       {"half_width", p.half_width},     {"connect_radius", p.connect_radius},
                       {"min_degree", p.min_degree},     {"max_degree", p.max_degree},
                       {"max_attempts", p.max_attempts}, {"placement", to_string(p.placement)}};
}

inline nlohmann::json network_to_json(const SensorNetwork& net)
{
    nlohmann::json positions = nlohmann::json::array();
    for (const auto& p : net.positions()) positions.push_back(to_vector(p));
    nlohmann::json edges = nlohmann::json::array();
    for (auto [i, j] : net.edges()) edges.push_back({i, j});

    nlohmann::json j{{"dimension", net.dimension()}, {"positions", positions}, {"edges", edges}};
    if (const auto& o = net.origin()) {
        j["generation"] = {{"params", o->params}, {"seed", o->seed}, {"attempts", o->attempts}};
    }
    return j;
}

inline SensorNetwork network_from_json(const nlohmann::json& j)
{
    std::vector<PointN> positions;
    for (const auto& p : j.at("positions")) positions.push_back(from_vector(p.get<std::vector<double>>()));
    std::vector<SensorNetwork::Edge> edges;
    for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>());
    SensorNetwork net(std::move(positions), edges);
    if (net.dimension() != j.at("dimension").get<std::size_t>())
        throw DimensionMismatch("declared dimension does not match positions");
    if (j.contains("generation")) {
        const auto& g = j.at("generation");
        const auto& p = g.at("params");
        NetworkOrigin o;
        o.params.num_sensors = p.at("num_sensors").get<std::size_t>();
        o.params.dimension = p.at("dimension").get<std::size_t>();
        o.params.half_width = p.at("half_width").get<double>();
        o.params.connect_radius = p.at("connect_radius").get<double>();
        o.params.min_degree = p.at("min_degree").get<std::size_t>();
        o.params.max_degree = p.at("max_degree").get<std::size_t>();
        o.params.max_attempts = p.at("max_attempts").get<std::size_t>();
        o.params.placement = placement_from_string(p.at("placement").get<std::string>());
        o.seed = g.at("seed").get<std::uint64_t>();
        o.attempts = g.at("attempts").get<std::size_t>();
        net.set_origin(o);
    }
    return net;
}

} // namespace dsrl

#endif // DSRL_NETWORK_HPP
