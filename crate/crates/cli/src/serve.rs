use std::future::Future;
use std::path::PathBuf;
use std::time::Duration;

use clap::Args;
use tokio::net::TcpListener;
use webtv_api::{AppState, UserStore};
use webtv_core::{Cms, CmsConfig};

use crate::config::FileConfig;
use crate::error::CliError;

#[derive(Debug, Clone, Default, Args)]
pub struct ServeArgs {
    /// Data directory; overrides the config file.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Listen address, for example 127.0.0.1:8080.
    #[arg(long)]
    pub listen: Option<String>,
    /// User file of `userId:sha256hex` lines; defaults to
    /// `<data-dir>/users.txt`.
    #[arg(long)]
    pub users_file: Option<PathBuf>,
}

/// Settings of a server run after merging flags over the config file.
#[derive(Debug, Clone)]
pub struct ServeSettings {
    pub cms: CmsConfig,
    pub listen: String,
    pub users_file: PathBuf,
    pub session_ttl: Duration,
}

impl ServeSettings {
    pub fn resolve(args: &ServeArgs, config: &FileConfig) -> Self {
        let mut cms = config.cms.clone();
        if let Some(dir) = &args.data_dir {
            cms.data_dir = dir.clone();
        }
        let users_file = args
            .users_file
            .clone()
            .or_else(|| config.server.users_file.clone())
            .unwrap_or_else(|| cms.data_dir.join("users.txt"));
        Self {
            listen: args
                .listen
                .clone()
                .unwrap_or_else(|| config.server.listen.clone()),
            users_file,
            session_ttl: Duration::from_secs(config.server.session_ttl_secs),
            cms,
        }
    }

    pub fn load_users(&self) -> Result<UserStore, CliError> {
        let users =
            UserStore::load(&self.users_file).map_err(|e| CliError::Config(e.to_string()))?;
        if users.is_empty() {
            return Err(CliError::Config(format!(
                "user file {} defines no users",
                self.users_file.display()
            )));
        }
        Ok(users)
    }

    pub fn open_state(&self, users: UserStore) -> Result<AppState, CliError> {
        let cms = Cms::open(self.cms.clone())
            .map_err(|e| CliError::Runtime(format!("cannot open data directory: {e}")))?;
        Ok(AppState::new(cms, users, self.session_ttl))
    }

    /// Loads the user file and opens the data directory.
    pub fn build_state(&self) -> Result<AppState, CliError> {
        self.open_state(self.load_users()?)
    }
}

/// Serves on an already bound listener until `shutdown` resolves.
pub async fn serve_on<F>(
    listener: TcpListener,
    state: AppState,
    shutdown: F,
) -> Result<(), CliError>
where
    F: Future<Output = ()> + Send + 'static,
{
    webtv_api::serve(listener, state, shutdown)
        .await
        .map_err(|e| CliError::Runtime(format!("server error: {e}")))
}

pub async fn serve(settings: ServeSettings) -> Result<(), CliError> {
    let users = settings.load_users()?;
    let listener = TcpListener::bind(&settings.listen)
        .await
        .map_err(|e| CliError::Runtime(format!("cannot listen on {}: {e}", settings.listen)))?;
    let state = settings.open_state(users)?;
    if let Ok(addr) = listener.local_addr() {
        eprintln!("serving on http://{addr}");
    }
    serve_on(listener, state, async {
        let _ = tokio::signal::ctrl_c().await;
        tracing::info!("shutting down");
    })
    .await
}
