import numpy as np
import pandas as pd
import matplotlib.pyplot as plt
import seaborn as sns
import warnings
warnings.filterwarnings('ignore')
from sklearn.model_selection import train_test_split
from sklearn.linear_model import LogisticRegression
from sklearn.preprocessing import MinMaxScaler
from sklearn.preprocessing import StandardScaler
from sklearn.svm import SVC
from sklearn.metrics import f1_score

df = pd.read_csv('heart.csv')

corr = df.corr(numeric_only=True)
print(corr['age'].sort_values())

df.tail()
df.columns
print(len(df))

print(df['age'].describe())
print(df['age'].skew())
sns.histplot(df['age'], kde=True)
plt.show()

def summarize(frame):
    return frame.describe().T

summary = summarize(df)
print(summary)

df.isnull().sum()
print(df.dtypes)
df.nunique()

num_cols = [c for c in df.columns if df[c].dtype != 'object']
print(num_cols)

missing = df.isnull().mean() * 100
missing = missing.sort_values(ascending=False)
print(missing.head(10))

dup = df.duplicated().sum()
print('duplicates:', dup)
df = df.drop_duplicates()

df['target'].value_counts()
sns.countplot(x='target', data=df)
plt.show()

plt.figure(figsize=(10, 6))
sns.heatmap(df.corr(), annot=True)
plt.title('Correlation')
plt.show()

df = df.dropna(subset=['target'])
df['chest_pain'] = df['chest_pain'].fillna(df['chest_pain'].mode()[0])
df['sex'] = df['sex'].fillna(df['sex'].mode()[0])
df['age'] = df['age'].fillna(df['age'].median())
df['resting_bp'] = df['resting_bp'].fillna(df['resting_bp'].median())
df['cholesterol'] = df['cholesterol'].fillna(df['cholesterol'].median())
df['target'] = df['target'].map({'yes': 1, 'no': 0})

X = df.drop('target', axis=1)
y = df['target']
X = pd.get_dummies(X)
X_train, X_test, y_train, y_test = train_test_split(X, y, test_size=0.2, random_state=34)
print(X_train.shape, X_test.shape)

prep0 = StandardScaler()
X_train = prep0.fit_transform(X_train)
X_test = prep0.transform(X_test)
prep1 = MinMaxScaler()
X_train = prep1.fit_transform(X_train)
X_test = prep1.transform(X_test)

model = LogisticRegression()
model.fit(X_train, y_train)
preds = model.predict(X_test)
print('f1', f1_score(y_test, preds, average='macro'))

model1 = SVC()
model1.fit(X_train, y_train)
preds = model1.predict(X_test)
print('f1', f1_score(y_test, preds, average='macro'))

submission = pd.DataFrame({'id': range(len(preds)), 'prediction': preds})
submission.to_csv('submission.csv', index=False)
print(submission.head())
