//! Bearer tokens and the role × endpoint matrix.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use axum::http::Method;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::canon::{self, CanonError};
use crate::domain::SessionId;

pub const PRINCIPALS_DOCUMENT: &str = "principals";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Expert,
    Device,
    ParentViewer,
}

impl Role {
    pub const ALL: [Role; 3] = [Role::Expert, Role::Device, Role::ParentViewer];
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Expert => "expert",
            Role::Device => "device",
            Role::ParentViewer => "parent_viewer",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Principal {
    pub principal_id: String,
    pub role: Role,
    pub token: String,
    /// Sessions whose annotated export this principal may read.
    #[serde(default)]
    pub shared_sessions: Vec<SessionId>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct PrincipalFile {
    principals: Vec<Principal>,
}

#[derive(Debug, thiserror::Error)]
pub enum TokenFileError {
    #[error("token file: {0}")]
    Io(#[from] std::io::Error),
    #[error("token file: {0}")]
    Document(#[from] CanonError),
    #[error("token file: {0}")]
    Invalid(String),
}

/// Token lookup keyed by the token's SHA-256.
#[derive(Debug, Clone, Default)]
pub struct Principals {
    by_hash: HashMap<String, Principal>,
}

fn token_hash(token: &str) -> String {
    hex::encode(Sha256::digest(token.as_bytes()))
}

impl Principals {
    pub fn new(principals: Vec<Principal>) -> Result<Self, TokenFileError> {
        let mut by_hash = HashMap::new();
        for p in principals {
            if p.token.len() < 8 {
                return Err(TokenFileError::Invalid(format!(
                    "token for {} is shorter than 8 characters",
                    p.principal_id
                )));
            }
            if by_hash.insert(token_hash(&p.token), p.clone()).is_some() {
                return Err(TokenFileError::Invalid(format!("duplicate token ({})", p.principal_id)));
            }
        }
        Ok(Self { by_hash })
    }

    pub fn load(path: &Path) -> Result<Self, TokenFileError> {
        let file: PrincipalFile =
            canon::from_document(PRINCIPALS_DOCUMENT, &std::fs::read_to_string(path)?)?;
        Self::new(file.principals)
    }

    pub fn to_document(principals: &[Principal]) -> Result<String, CanonError> {
        canon::to_document(PRINCIPALS_DOCUMENT, &PrincipalFile { principals: principals.to_vec() })
    }

    pub fn authenticate(&self, token: &str) -> Option<&Principal> {
        self.by_hash.get(&token_hash(token))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Endpoint {
    ListOutlines,
    CreateOutline,
    GetOutline,
    EditChapter,
    AddBranch,
    DeployTask,
    PendingTasks,
    ListSessions,
    StartSession,
    SubmitDrawing,
    AcceptCharacter,
    SubmitResponse,
    Advance,
    GetState,
    OverrideBranch,
    AddComment,
    ExportPrint,
    ExportAnnotated,
    GetAsset,
}

impl Endpoint {
    pub const ALL: [Endpoint; 19] = [
        Endpoint::ListOutlines,
        Endpoint::CreateOutline,
        Endpoint::GetOutline,
        Endpoint::EditChapter,
        Endpoint::AddBranch,
        Endpoint::DeployTask,
        Endpoint::PendingTasks,
        Endpoint::ListSessions,
        Endpoint::StartSession,
        Endpoint::SubmitDrawing,
        Endpoint::AcceptCharacter,
        Endpoint::SubmitResponse,
        Endpoint::Advance,
        Endpoint::GetState,
        Endpoint::OverrideBranch,
        Endpoint::AddComment,
        Endpoint::ExportPrint,
        Endpoint::ExportAnnotated,
        Endpoint::GetAsset,
    ];

    /// Method and route pattern. The two export endpoints share a route and
    /// differ by the `variant` query parameter.
    pub fn route(self) -> (Method, &'static str) {
        use Endpoint::*;
        match self {
            ListOutlines => (Method::GET, "/outlines"),
            CreateOutline => (Method::POST, "/outlines"),
            GetOutline => (Method::GET, "/outlines/{id}"),
            EditChapter => (Method::PATCH, "/outlines/{id}/chapters/{k}"),
            AddBranch => (Method::POST, "/outlines/{id}/chapters/{k}/branches"),
            DeployTask => (Method::POST, "/tasks"),
            PendingTasks => (Method::GET, "/tasks/pending"),
            ListSessions => (Method::GET, "/sessions"),
            StartSession => (Method::POST, "/sessions"),
            SubmitDrawing => (Method::POST, "/sessions/{id}/drawing"),
            AcceptCharacter => (Method::POST, "/sessions/{id}/character/accept"),
            SubmitResponse => (Method::POST, "/sessions/{id}/responses"),
            Advance => (Method::POST, "/sessions/{id}/advance"),
            GetState => (Method::GET, "/sessions/{id}/state"),
            OverrideBranch => (Method::POST, "/sessions/{id}/branch-override"),
            AddComment => (Method::POST, "/sessions/{id}/comments"),
            ExportPrint | ExportAnnotated => (Method::GET, "/sessions/{id}/export"),
            GetAsset => (Method::GET, "/assets/{file}"),
        }
    }

    /// Resolves a matched route; `annotated` picks between the exports.
    pub fn resolve(method: &Method, pattern: &str, annotated: bool) -> Option<Endpoint> {
        Endpoint::ALL.into_iter().find(|e| {
            let (m, p) = e.route();
            let variant_ok = match e {
                Endpoint::ExportPrint => !annotated,
                Endpoint::ExportAnnotated => annotated,
                _ => true,
            };
            &m == method && p == pattern && variant_ok
        })
    }
}

/// The complete allow/deny table.
pub fn allowed(role: Role, endpoint: Endpoint) -> bool {
    use Endpoint::*;
    match (role, endpoint) {
        (Role::Expert, ListOutlines | CreateOutline | GetOutline | EditChapter | AddBranch) => true,
        (Role::Expert, DeployTask | PendingTasks | ListSessions) => true,
        (Role::Expert, StartSession | SubmitDrawing | AcceptCharacter | SubmitResponse) => false,
        (Role::Expert, Advance | GetState | OverrideBranch | AddComment) => true,
        (Role::Expert, ExportPrint | ExportAnnotated | GetAsset) => true,

        (Role::Device, ListOutlines | CreateOutline | GetOutline | EditChapter | AddBranch) => false,
        (Role::Device, DeployTask | ListSessions) => false,
        (Role::Device, PendingTasks | StartSession | SubmitDrawing | AcceptCharacter) => true,
        (Role::Device, SubmitResponse | Advance | GetState) => true,
        (Role::Device, OverrideBranch | AddComment | ExportAnnotated) => false,
        (Role::Device, ExportPrint | GetAsset) => true,

        (Role::ParentViewer, ExportAnnotated | GetAsset) => true,
        (Role::ParentViewer, _) => false,
    }
}
