use std::fmt;

/// Robot (agent) identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RobotId(pub u32);

impl fmt::Display for RobotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

/// Global variable key. A shared variable carries one key; per-robot copies
/// are distinguished by which robot's value map holds them, not by the key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VariableKey {
    pub robot: RobotId,
    pub index: u64,
}

impl VariableKey {
    pub fn new(robot: u32, index: u64) -> Self {
        Self {
            robot: RobotId(robot),
            index,
        }
    }
}

impl fmt::Display for VariableKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.robot, self.index)
    }
}
