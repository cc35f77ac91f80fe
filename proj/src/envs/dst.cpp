#include "morl/envs/dst.hpp"

#include <fstream>
#include <sstream>

namespace morl::envs {

DstConfig DstConfig::classic() {
  DstConfig cfg;
  cfg.treasure_values = {1, 2, 3, 5, 8, 16, 24, 50, 74, 124};
  cfg.treasure_depths = {1, 2, 3, 4, 4, 4, 7, 7, 9, 10};
  return cfg;
}

void DstConfig::validate() const {
  if (columns < 1 || rows < 2) throw ConfigError("dst: grid must be at least 1x2");
  if (static_cast<int>(treasure_depths.size()) != columns ||
      static_cast<int>(treasure_values.size()) != columns)
    throw ConfigError("dst: exactly one treasure per column required");
  for (int c = 0; c < columns; ++c) {
    const int d = treasure_depths[static_cast<std::size_t>(c)];
    if (d < 1 || d >= rows) throw ConfigError("dst: treasure depth out of grid");
    if (c > 0) {
      if (!(treasure_values[static_cast<std::size_t>(c)] > treasure_values[static_cast<std::size_t>(c - 1)]))
        throw ConfigError("dst: treasure values must be strictly increasing left to right");
      if (d < treasure_depths[static_cast<std::size_t>(c - 1)])
        throw ConfigError("dst: treasure depths must be non-decreasing left to right");
    }
  }
  if (treasure_depths[0] < 1) throw ConfigError("dst: start cell must not be a treasure");
  if (max_steps < 1) throw ConfigError("dst: max_steps must be positive");
}

DstConfig load_dst_layout(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("dst layout: cannot open " + path);
  DstConfig cfg;
  cfg.treasure_values.clear();
  cfg.treasure_depths.clear();
  std::string line;
  std::vector<std::vector<int>> grid;  // -1 water/seabed, k treasure index
  int columns = -1;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '%') continue;
    if (line.rfind("values:", 0) == 0) {
      std::istringstream vs(line.substr(7));
      scalar_t v;
      while (vs >> v) cfg.treasure_values.push_back(v);
      continue;
    }
    if (line.rfind("max_steps:", 0) == 0) {
      cfg.max_steps = std::stoi(line.substr(10));
      continue;
    }
    std::vector<int> row;
    if (line.find(' ') != std::string::npos || line.find('T') != std::string::npos) {
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) {
        if (tok == "." || tok == "#")
          row.push_back(-1);
        else if (tok[0] == 'T')
          row.push_back(std::stoi(tok.substr(1)));
        else
          row.push_back(std::stoi(tok));
      }
    } else {
      for (char ch : line) {
        if (ch == '.' || ch == '#')
          row.push_back(-1);
        else if (ch >= '0' && ch <= '9')
          row.push_back(ch - '0');
        else
          throw ConfigError(std::string("dst layout: unexpected cell '") + ch + "'");
      }
    }
    if (columns < 0) columns = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != columns) throw ConfigError("dst layout: ragged grid rows");
    grid.push_back(std::move(row));
  }
  if (grid.empty()) throw ConfigError("dst layout: no grid rows");
  if (cfg.treasure_values.empty()) throw ConfigError("dst layout: missing values: header");
  cfg.columns = columns;
  cfg.rows = static_cast<int>(grid.size());
  cfg.treasure_depths.assign(static_cast<std::size_t>(columns), -1);
  for (int r = 0; r < cfg.rows; ++r)
    for (int c = 0; c < cfg.columns; ++c) {
      const int k = grid[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      if (k < 0) continue;
      if (k != c) throw ConfigError("dst layout: treasure index must match its column");
      if (cfg.treasure_depths[static_cast<std::size_t>(c)] >= 0)
        throw ConfigError("dst layout: more than one treasure in a column");
      cfg.treasure_depths[static_cast<std::size_t>(c)] = r;
    }
  cfg.validate();
  return cfg;
}

DeepSeaTreasure::DeepSeaTreasure(DstConfig cfg, StateEncoding encoding)
    : cfg_(std::move(cfg)), encoding_(encoding) {
  cfg_.validate();
  reset();
}

void DeepSeaTreasure::reset() {
  state_ = DstState{0, 0, 0};
  terminal_ = false;
}

void DeepSeaTreasure::set_state(const DstState& s) {
  if (s.col < 0 || s.col >= cfg_.columns || s.row < 0 || s.row >= cfg_.rows)
    throw ContractViolation("dst: state outside grid");
  if (cfg_.is_seabed(s.col, s.row) || cfg_.is_treasure(s.col, s.row))
    throw ContractViolation("dst: cannot place submarine on seabed or treasure");
  state_ = s;
  terminal_ = false;
}

StepResult DeepSeaTreasure::step(int action) {
  if (terminal_) throw ContractViolation("dst: step on terminal state");
  if (action < 0 || action >= action_count()) throw ContractViolation("dst: action index out of range");
  static constexpr int dc[4] = {-1, 1, 0, 0};
  static constexpr int dr[4] = {0, 0, -1, 1};
  int nc = state_.col + dc[action];
  int nr = state_.row + dr[action];
  // Border and seabed both leave the submarine on the current cell.
  if (nc < 0 || nc >= cfg_.columns || nr < 0 || nr >= cfg_.rows || cfg_.is_seabed(nc, nr)) {
    nc = state_.col;
    nr = state_.row;
  }
  state_.col = nc;
  state_.row = nr;
  state_.steps += 1;

  scalar_t treasure = 0.0;
  if (cfg_.is_treasure(nc, nr)) {
    treasure = cfg_.treasure_values[static_cast<std::size_t>(nc)];
    terminal_ = true;
  } else if (state_.steps >= cfg_.max_steps) {
    treasure = cfg_.timeout_treasure_reward;
    terminal_ = true;
  }
  return StepResult{RewardVector{treasure, -1.0}, terminal_};
}

vector_t DeepSeaTreasure::observation() const {
  switch (encoding_) {
    case StateEncoding::OneHot: {
      vector_t v = vector_t::Zero(cfg_.rows * cfg_.columns);
      v(state_id()) = 1.0;
      return v;
    }
    case StateEncoding::Coordinate: {
      vector_t v(2);
      v(0) = cfg_.columns > 1 ? static_cast<scalar_t>(state_.col) / (cfg_.columns - 1) : 0.0;
      v(1) = cfg_.rows > 1 ? static_cast<scalar_t>(state_.row) / (cfg_.rows - 1) : 0.0;
      return v;
    }
    case StateEncoding::GridImage: {
      // Intensity codes: water 0, seabed 0.25, treasure 0.5, submarine 1.
      vector_t v = vector_t::Zero(cfg_.rows * cfg_.columns);
      for (int r = 0; r < cfg_.rows; ++r)
        for (int c = 0; c < cfg_.columns; ++c) {
          if (cfg_.is_seabed(c, r)) v(r * cfg_.columns + c) = 0.25;
          if (cfg_.is_treasure(c, r)) v(r * cfg_.columns + c) = 0.5;
        }
      v(state_id()) = 1.0;
      return v;
    }
  }
  throw ConfigError("dst: unknown state encoding");
}

int DeepSeaTreasure::observation_size() const {
  return encoding_ == StateEncoding::Coordinate ? 2 : cfg_.rows * cfg_.columns;
}

std::unique_ptr<MomdpEnv> DeepSeaTreasure::clone() const {
  return std::make_unique<DeepSeaTreasure>(*this);
}

}  // namespace morl::envs
