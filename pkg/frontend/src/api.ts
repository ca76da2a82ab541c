/* Typed client for the study service HTTP/JSON API. */

export type RevealDirection = 'LTR' | 'RTL' | 'none';

export interface RevealInfo {
	direction: RevealDirection;
	duration_s: number;
}

export interface Assignment {
	user_id: string;
	group: string;
	image_id: string;
	image_width: number;
	image_height: number;
	tolerance: number;
	practice_image_id: string;
	reveal: RevealInfo;
	session: number;
	session_opens_at: number;
	practice_done: boolean;
	awaiting_confirmation: boolean;
}

export interface EnrollResult {
	user_id: string;
	group: string;
	image_id: string;
	enrolled_at: number;
}

export interface LoginResult {
	success: boolean;
	session: number;
	session_completed: boolean;
	unsuccessful_attempts: number;
}

export type Point = [number, number];

export class ApiError extends Error {
	constructor(
		readonly status: number,
		readonly code: string,
		message: string,
	) {
		super(message);
		this.name = 'ApiError';
	}
}

async function parseError(response: Response): Promise<never> {
	let code = 'http_error';
	let message = `${response.status} ${response.statusText}`;
	try {
		const body = await response.json();
		if (body && body.detail && typeof body.detail === 'object') {
			code = body.detail.error ?? code;
			message = body.detail.message ?? message;
		}
	} catch {
		/* non-JSON error body: keep the HTTP status text */
	}
	throw new ApiError(response.status, code, message);
}

export class StudyApi {
	constructor(
		private readonly baseUrl: string,
		private readonly fetchFn: typeof fetch = (...args) => fetch(...args),
	) {}

	private async post<T>(path: string, body: unknown): Promise<T> {
		const response = await this.fetchFn(this.baseUrl + path, {
			method: 'POST',
			headers: { 'Content-Type': 'application/json' },
			body: JSON.stringify(body),
		});
		if (!response.ok) await parseError(response);
		return (await response.json()) as T;
	}

	private async get<T>(path: string): Promise<T> {
		const response = await this.fetchFn(this.baseUrl + path);
		if (!response.ok) await parseError(response);
		return (await response.json()) as T;
	}

	enroll(userId: string, mobile = false): Promise<EnrollResult> {
		return this.post('/enroll', { user_id: userId, mobile });
	}

	assignment(userId: string): Promise<Assignment> {
		return this.get(`/assignment?user_id=${encodeURIComponent(userId)}`);
	}

	practiceComplete(userId: string): Promise<{ status: string }> {
		return this.post('/practice-complete', { user_id: userId });
	}

	createPassword(
		userId: string,
		points: Point[],
		creationDurationS?: number,
	): Promise<{ status: string; next: string }> {
		return this.post('/password', {
			user_id: userId,
			points,
			creation_duration_s: creationDurationS ?? null,
		});
	}

	login(
		userId: string,
		points: Point[],
		displayedAt?: number,
		session?: number,
	): Promise<LoginResult> {
		return this.post('/login', {
			user_id: userId,
			points,
			session: session ?? null,
			displayed_at: displayedAt ?? null,
		});
	}

	reset(userId: string, session?: number): Promise<{ status: string }> {
		return this.post('/reset', { user_id: userId, session: session ?? null });
	}

	questionnaire(
		userId: string,
		session: number,
		answers: Record<string, unknown>,
	): Promise<{ status: string }> {
		return this.post('/questionnaire', { user_id: userId, session, answers });
	}

	sus(userId: string, answers: number[]): Promise<{ status: string; score: number }> {
		return this.post('/sus', { user_id: userId, answers });
	}
}
