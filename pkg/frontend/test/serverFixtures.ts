/** Loads captured service responses. Regenerate with `npm run fixtures`
 * (requires the Python package installed). */

import { readFileSync } from "node:fs";
import { join } from "node:path";

// import.meta.url is rewritten under the DOM test environment, so
// fixtures resolve from the project root vitest runs in.
const FIXTURE_DIR = join(process.cwd(), "test", "fixtures");

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURE_DIR, `${name}.json`), "utf8")) as T;
}
