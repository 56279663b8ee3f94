pub mod agents;
pub mod assets;
pub mod canon;
pub mod domain;
pub mod provider;
pub mod session;
pub mod insight;
pub mod storybook;
pub mod service;
pub mod sim;
pub mod cli;
