/**
 * Identity token persistence.
 *
 * The server-issued token is kept in a persistent cookie so a reload (or a
 * new tab) resumes the same agent. When cookie storage is unavailable the
 * store falls back to tab-scoped memory, which still covers reconnects
 * within the page's lifetime.
 */

export const TOKEN_COOKIE = "swarm_token";
const COOKIE_MAX_AGE_SEC = 365 * 24 * 3600;

export interface TokenStore {
  load(): string | null;
  save(token: string): void;
  clear(): void;
}

/** Minimal view of `document` so tests can pass a plain cookie jar. */
export interface CookieJar {
  cookie: string;
}

function readCookie(jar: CookieJar, name: string): string | null {
  for (const part of jar.cookie.split(";")) {
    const eq = part.indexOf("=");
    if (eq < 0) continue;
    if (part.slice(0, eq).trim() === name) {
      return decodeURIComponent(part.slice(eq + 1).trim());
    }
  }
  return null;
}

/**
 * Build the token store. Storage failures are detected by a write/read
 * round-trip, not by sniffing, so blocked cookies degrade silently.
 */
export function makeTokenStore(jar: CookieJar): TokenStore {
  let memory: string | null = null;
  return {
    load(): string | null {
      try {
        const fromCookie = readCookie(jar, TOKEN_COOKIE);
        if (fromCookie !== null && fromCookie !== "") return fromCookie;
      } catch {
        // fall through to memory
      }
      return memory;
    },
    save(token: string): void {
      memory = token;
      try {
        jar.cookie = `${TOKEN_COOKIE}=${encodeURIComponent(token)}; path=/; max-age=${COOKIE_MAX_AGE_SEC}; samesite=lax`;
        if (readCookie(jar, TOKEN_COOKIE) !== token) return; // blocked: memory holds it
      } catch {
        // cookie write failed; memory holds it
      }
    },
    clear(): void {
      memory = null;
      try {
        jar.cookie = `${TOKEN_COOKIE}=; path=/; max-age=0`;
      } catch {
        // nothing else to clear
      }
    },
  };
}
